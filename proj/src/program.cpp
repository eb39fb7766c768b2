#include "dso/program.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>
#include <tuple>

namespace dso {

std::string_view symbol_name(Symbol s) {
    switch (s) {
        case Symbol::E: return "E";
        case Symbol::R: return "R";
        case Symbol::Pg: return "Pg";
        case Symbol::Pr: return "Pr";
        case Symbol::Pc: return "Pc";
        case Symbol::Pdis: return "Pdis";
        case Symbol::PD: return "PD";
        case Symbol::PE: return "PE";
        case Symbol::QS: return "QS";
        case Symbol::Deg: return "d";
        case Symbol::V: return "v";
        case Symbol::Pf: return "p_kj";
        case Symbol::Qf: return "q_kj";
        case Symbol::L: return "l";
        case Symbol::Psub: return "p_sub";
        case Symbol::Qsub: return "q_sub";
    }
    return "?";
}

IndexDomain symbol_domain(Symbol s) {
    switch (s) {
        case Symbol::E:
        case Symbol::R: return IndexDomain::Time;
        case Symbol::V: return IndexDomain::Bus;
        case Symbol::Pf:
        case Symbol::Qf:
        case Symbol::L: return IndexDomain::Branch;
        case Symbol::Psub:
        case Symbol::Qsub: return IndexDomain::Substation;
        default: return IndexDomain::Prosumer;
    }
}

VariableMap::VariableMap(ModelDims dims, std::span<const Symbol> symbols) : dims_(dims) {
    offset_.fill(-1);
    for (Symbol sym : kAllSymbols) {
        if (std::find(symbols.begin(), symbols.end(), sym) == symbols.end()) continue;
        offset_[static_cast<int>(sym)] = size_;
        order_[n_registered_++] = sym;
        size_ += extent(sym);
    }
}

int VariableMap::extent(Symbol sym) const {
    const int T = dims_.horizon;
    switch (symbol_domain(sym)) {
        case IndexDomain::Time: return T;
        case IndexDomain::Prosumer: return dims_.n_scenarios * dims_.n_prosumers * T;
        case IndexDomain::Bus: return dims_.n_scenarios * dims_.n_buses * T;
        case IndexDomain::Branch: return dims_.n_scenarios * dims_.n_branches * T;
        case IndexDomain::Substation: return dims_.n_scenarios * T;
    }
    return 0;
}

int VariableMap::count(Symbol sym) const { return has(sym) ? extent(sym) : 0; }

namespace {

[[noreturn]] void missing(Symbol sym, int s, int idx, int t, std::string_view why) {
    std::ostringstream os;
    os << "missing variable " << symbol_name(sym) << "[s=" << s << ",i=" << idx << ",t=" << t
       << "]: " << why;
    throw AssemblyError(os.str());
}

}  // namespace

int VariableMap::at(Symbol sym, int s, int idx, int t) const {
    if (!has(sym)) missing(sym, s, idx, t, "symbol not registered");
    int n_elem = 0;
    switch (symbol_domain(sym)) {
        case IndexDomain::Prosumer: n_elem = dims_.n_prosumers; break;
        case IndexDomain::Bus: n_elem = dims_.n_buses; break;
        case IndexDomain::Branch: n_elem = dims_.n_branches; break;
        default: missing(sym, s, idx, t, "symbol is not element-indexed");
    }
    if (s < 0 || s >= dims_.n_scenarios || idx < 0 || idx >= n_elem || t < 0 ||
        t >= dims_.horizon) {
        missing(sym, s, idx, t, "index out of range");
    }
    return offset_[static_cast<int>(sym)] + (s * n_elem + idx) * dims_.horizon + t;
}

int VariableMap::at(Symbol sym, int t) const {
    if (!has(sym)) missing(sym, 0, 0, t, "symbol not registered");
    if (symbol_domain(sym) != IndexDomain::Time) missing(sym, 0, 0, t, "symbol is not ex-ante");
    if (t < 0 || t >= dims_.horizon) missing(sym, 0, 0, t, "index out of range");
    return offset_[static_cast<int>(sym)] + t;
}

int VariableMap::at_st(Symbol sym, int s, int t) const {
    if (!has(sym)) missing(sym, s, 0, t, "symbol not registered");
    if (symbol_domain(sym) != IndexDomain::Substation) {
        missing(sym, s, 0, t, "symbol is not a substation quantity");
    }
    if (s < 0 || s >= dims_.n_scenarios || t < 0 || t >= dims_.horizon) {
        missing(sym, s, 0, t, "index out of range");
    }
    return offset_[static_cast<int>(sym)] + s * dims_.horizon + t;
}

VarKey VariableMap::key(int col) const {
    if (col < 0 || col >= size_) throw AssemblyError("column out of range");
    int k = n_registered_ - 1;
    while (offset_[static_cast<int>(order_[k])] > col) --k;
    const Symbol sym = order_[k];
    int rel = col - offset_[static_cast<int>(sym)];
    const int T = dims_.horizon;
    VarKey key{sym, 0, 0, rel % T};
    rel /= T;
    switch (symbol_domain(sym)) {
        case IndexDomain::Time: break;
        case IndexDomain::Substation: key.s = rel; break;
        case IndexDomain::Prosumer:
            key.idx = rel % dims_.n_prosumers;
            key.s = rel / dims_.n_prosumers;
            break;
        case IndexDomain::Bus:
            key.idx = rel % dims_.n_buses;
            key.s = rel / dims_.n_buses;
            break;
        case IndexDomain::Branch:
            key.idx = rel % dims_.n_branches;
            key.s = rel / dims_.n_branches;
            break;
    }
    return key;
}

std::string VariableMap::name(int col) const {
    const VarKey k = key(col);
    std::ostringstream os;
    os << symbol_name(k.sym) << '[';
    switch (symbol_domain(k.sym)) {
        case IndexDomain::Time: os << "t=" << k.t; break;
        case IndexDomain::Substation: os << "s=" << k.s << ",t=" << k.t; break;
        default: os << "s=" << k.s << ",i=" << k.idx << ",t=" << k.t; break;
    }
    os << ']';
    return os.str();
}

// ---------------------------------------------------------------------------

std::string_view row_tag_name(RowTag t) {
    switch (t) {
        case RowTag::ActiveInjection: return "active_injection";
        case RowTag::ReactiveInjection: return "reactive_injection";
        case RowTag::VoltageDrop: return "voltage_drop";
        case RowTag::VoltageLower: return "voltage_lower";
        case RowTag::VoltageUpper: return "voltage_upper";
        case RowTag::SubstationVoltage: return "substation_voltage";
        case RowTag::ThermalLower: return "thermal_lower";
        case RowTag::ThermalUpper: return "thermal_upper";
        case RowTag::ThermalFixed: return "thermal_fixed";
        case RowTag::ReserveLower: return "reserve_lower";
        case RowTag::ReserveRate: return "reserve_rate";
        case RowTag::ReserveHeadroom: return "reserve_headroom";
        case RowTag::ReserveFixed: return "reserve_fixed";
        case RowTag::RampUp: return "ramp_up";
        case RowTag::RampDown: return "ramp_down";
        case RowTag::ChargeLower: return "charge_lower";
        case RowTag::ChargeUpper: return "charge_upper";
        case RowTag::DischargeLower: return "discharge_lower";
        case RowTag::DischargeUpper: return "discharge_upper";
        case RowTag::StorageFixed: return "storage_fixed";
        case RowTag::EnergyInitial: return "energy_initial";
        case RowTag::EnergyRecursion: return "energy_recursion";
        case RowTag::EnergyLower: return "energy_lower";
        case RowTag::EnergyUpper: return "energy_upper";
        case RowTag::TerminalEnergyLower: return "terminal_energy_lower";
        case RowTag::TerminalEnergyUpper: return "terminal_energy_upper";
        case RowTag::Degradation: return "degradation";
        case RowTag::DegradationUpper: return "degradation_upper";
        case RowTag::CurtailLower: return "curtail_lower";
        case RowTag::CurtailUpper: return "curtail_upper";
        case RowTag::CurtailFixed: return "curtail_fixed";
        case RowTag::Balance: return "balance";
        case RowTag::MarketEnergy: return "market_energy";
        case RowTag::MarketReserve: return "market_reserve";
        case RowTag::ExchangeUpper: return "exchange_upper";
        case RowTag::ExchangeLower: return "exchange_lower";
        case RowTag::ExchangeReserveUpper: return "exchange_reserve_upper";
        case RowTag::ExchangeReserveLower: return "exchange_reserve_lower";
        case RowTag::Generic: return "generic";
    }
    return "?";
}

std::string_view cone_tag_name(ConeTag t) {
    switch (t) {
        case ConeTag::Loss: return "loss_cone";
        case ConeTag::Flow: return "flow_cone";
        case ConeTag::Generic: return "cone";
    }
    return "?";
}

void ConstraintBlock::box(RowTag lower, RowTag upper, RowTag fixed, int s, int idx, int t, int var,
                          double lo, double hi) {
    if (lo > hi) {
        std::ostringstream os;
        os << "empty bounds [" << lo << ", " << hi << "] for " << row_tag_name(fixed);
        throw AssemblyError(os.str());
    }
    if (lo == hi) {
        eq({fixed, s, idx, t}, {{var, 1.0}}, lo);
        return;
    }
    if (std::isfinite(lo)) le({lower, s, idx, t}, {{var, -1.0}}, -lo);
    if (std::isfinite(hi)) le({upper, s, idx, t}, {{var, 1.0}}, hi);
}

std::size_t ConstraintBlock::count(RowTag tag) const {
    return static_cast<std::size_t>(
        std::count_if(rows.begin(), rows.end(), [&](const LinearRow& r) { return r.id.tag == tag; }));
}

std::size_t ConstraintBlock::count(ConeTag tag) const {
    return static_cast<std::size_t>(
        std::count_if(cones.begin(), cones.end(), [&](const ConeRow& c) { return c.tag == tag; }));
}

void ConstraintBlock::append(ConstraintBlock&& other) {
    rows.insert(rows.end(), std::make_move_iterator(other.rows.begin()),
                std::make_move_iterator(other.rows.end()));
    cones.insert(cones.end(), std::make_move_iterator(other.cones.begin()),
                 std::make_move_iterator(other.cones.end()));
}

// ---------------------------------------------------------------------------

double ConicProgram::objective(const Eigen::VectorXd& x) const {
    return 0.5 * x.dot(hessian_times(x)) + q.dot(x) + constant;
}

Eigen::VectorXd ConicProgram::hessian_times(const Eigen::VectorXd& x) const {
    return P.selfadjointView<Eigen::Upper>() * x;
}

ProgramBuilder::ProgramBuilder(int n_vars) : n_(n_vars), lin_(Eigen::VectorXd::Zero(n_vars)) {}

void ProgramBuilder::check_var(int v) const {
    if (v < 0 || v >= n_) {
        throw AssemblyError("row references nonexistent variable column " + std::to_string(v));
    }
}

void ProgramBuilder::add(ConstraintBlock&& block) {
    for (const auto& r : block.rows) {
        for (const auto& term : r.terms) check_var(term.var);
    }
    for (const auto& c : block.cones) {
        if (c.members.empty()) throw AssemblyError("empty cone");
        for (const auto& m : c.members) {
            for (const auto& term : m.terms) check_var(term.var);
        }
    }
    rows_.insert(rows_.end(), std::make_move_iterator(block.rows.begin()),
                 std::make_move_iterator(block.rows.end()));
    cones_.insert(cones_.end(), std::make_move_iterator(block.cones.begin()),
                  std::make_move_iterator(block.cones.end()));
}

void ProgramBuilder::add_quadratic(int i, int j, double coef) {
    check_var(i);
    check_var(j);
    if (coef == 0.0) return;
    if (i == j) {
        quad_.emplace_back(i, i, 2.0 * coef);
    } else {
        quad_.emplace_back(std::min(i, j), std::max(i, j), coef);
    }
}

void ProgramBuilder::add_linear(int i, double coef) {
    check_var(i);
    lin_[i] += coef;
}

ConicProgram ProgramBuilder::seal() && {
    auto row_key = [](const LinearRow& r) {
        return std::make_tuple(static_cast<int>(r.sense), static_cast<int>(r.id.tag), r.id.s,
                               r.id.idx, r.id.t);
    };
    std::stable_sort(rows_.begin(), rows_.end(),
                     [&](const LinearRow& a, const LinearRow& b) { return row_key(a) < row_key(b); });
    std::stable_sort(cones_.begin(), cones_.end(), [](const ConeRow& a, const ConeRow& b) {
        return std::make_tuple(static_cast<int>(a.tag), a.s, a.idx, a.t) <
               std::make_tuple(static_cast<int>(b.tag), b.s, b.idx, b.t);
    });

    ConicProgram prog;
    prog.n = n_;
    prog.q = std::move(lin_);
    prog.constant = constant_;
    prog.P.resize(n_, n_);
    prog.P.setFromTriplets(quad_.begin(), quad_.end());
    prog.P.makeCompressed();

    int m = static_cast<int>(rows_.size());
    for (const auto& c : cones_) m += static_cast<int>(c.members.size());

    std::vector<Eigen::Triplet<double>> trip;
    prog.b = Eigen::VectorXd::Zero(m);
    int row = 0;
    for (const auto& r : rows_) {
        for (const auto& term : r.terms) trip.emplace_back(row, term.var, term.coef);
        prog.b[row] = r.rhs;
        prog.row_ids.push_back(r.id);
        if (r.sense == Sense::Eq) {
            ++prog.n_zero;
        } else {
            ++prog.n_nonneg;
        }
        ++row;
    }
    for (auto& c : cones_) {
        prog.soc_offsets.push_back(row);
        prog.soc_dims.push_back(static_cast<int>(c.members.size()));
        for (const auto& member : c.members) {
            for (const auto& term : member.terms) trip.emplace_back(row, term.var, -term.coef);
            prog.b[row] = member.constant;
            ++row;
        }
        c.members.clear();
        prog.cone_ids.push_back(std::move(c));
    }
    prog.A.resize(m, n_);
    prog.A.setFromTriplets(trip.begin(), trip.end());
    prog.A.makeCompressed();
    return prog;
}

// ---------------------------------------------------------------------------

void write_cbf(std::ostream& os, const ConicProgram& prog) {
    std::vector<std::pair<int, double>> diag;
    for (int j = 0; j < prog.P.outerSize(); ++j) {
        for (SparseMatrix::InnerIterator it(prog.P, j); it; ++it) {
            if (it.row() != it.col()) {
                throw std::invalid_argument("CBF export requires a diagonal objective Hessian");
            }
            if (it.value() != 0.0) diag.emplace_back(j, it.value());
        }
    }
    const int nq = static_cast<int>(diag.size());
    const int n_total = prog.n + nq;
    const int m_total = prog.m() + 3 * nq;

    os.precision(17);
    os << "VER\n3\n\nOBJSENSE\nMIN\n\n";
    os << "VAR\n" << n_total << " 1\nF " << n_total << "\n\n";

    int n_cones = (prog.n_zero > 0) + (prog.n_nonneg > 0) + static_cast<int>(prog.soc_dims.size()) + nq;
    os << "CON\n" << m_total << ' ' << n_cones << '\n';
    if (prog.n_zero > 0) os << "L= " << prog.n_zero << '\n';
    if (prog.n_nonneg > 0) os << "L+ " << prog.n_nonneg << '\n';
    for (int d : prog.soc_dims) os << "Q " << d << '\n';
    for (int k = 0; k < nq; ++k) os << "QR 3\n";
    os << '\n';

    // objective: q'x + sum of epigraph variables + constant
    int obj_nnz = nq;
    for (int j = 0; j < prog.n; ++j) obj_nnz += prog.q[j] != 0.0;
    os << "OBJACOORD\n" << obj_nnz << '\n';
    for (int j = 0; j < prog.n; ++j) {
        if (prog.q[j] != 0.0) os << j << ' ' << prog.q[j] << '\n';
    }
    for (int k = 0; k < nq; ++k) os << prog.n + k << " 1\n";
    os << '\n';
    if (prog.constant != 0.0) os << "OBJBCOORD\n" << prog.constant << "\n\n";

    // rows: b - Ax in K  ->  (-A)x + b in K
    std::vector<std::tuple<int, int, double>> acoord;
    for (int j = 0; j < prog.A.outerSize(); ++j) {
        for (SparseMatrix::InnerIterator it(prog.A, j); it; ++it) {
            if (it.value() != 0.0) acoord.emplace_back(it.row(), j, -it.value());
        }
    }
    std::vector<std::pair<int, double>> bcoord;
    for (int i = 0; i < prog.m(); ++i) {
        if (prog.b[i] != 0.0) bcoord.emplace_back(i, prog.b[i]);
    }
    // t_k >= 1/2 P_kk x_k^2  <=>  (t_k, 1/2, sqrt(P_kk / 2) x_k) in QR
    for (int k = 0; k < nq; ++k) {
        const int r0 = prog.m() + 3 * k;
        acoord.emplace_back(r0, prog.n + k, 1.0);
        bcoord.emplace_back(r0 + 1, 0.5);
        acoord.emplace_back(r0 + 2, diag[k].first, std::sqrt(diag[k].second / 2.0));
    }
    std::sort(acoord.begin(), acoord.end());
    os << "ACOORD\n" << acoord.size() << '\n';
    for (const auto& [r, c, v] : acoord) os << r << ' ' << c << ' ' << v << '\n';
    os << "\nBCOORD\n" << bcoord.size() << '\n';
    for (const auto& [r, v] : bcoord) os << r << ' ' << v << '\n';
}

}  // namespace dso
