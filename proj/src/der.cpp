#include "dso/der.hpp"

#include <cmath>

namespace dso {

std::vector<std::string> validate_prosumer(const ProsumerParams& p, int horizon) {
    std::vector<std::string> out;
    auto check = [&](bool ok, const char* what) {
        if (!ok) out.emplace_back(what);
    };
    check(p.pg_min >= 0.0 && p.pg_min <= p.pg_max, "require 0 <= pg_min <= pg_max");
    check(p.ru >= 0.0 && p.rd >= 0.0 && p.msr >= 0.0, "ramp limits and reserve rate must be nonnegative");
    check(p.eta > 0.0 && p.eta <= 1.0, "eta must lie in (0, 1]");
    check(p.ps_max >= 0.0, "ps_max must be nonnegative");
    check(p.q_min >= 0.0 && p.q_min <= p.initial_energy() && p.initial_energy() <= p.q_cap,
          "require 0 <= q_min <= q_init <= q_cap");
    check(p.alpha_g >= 0.0 && p.alpha_s >= 0.0 && p.alpha_u >= 0.0 && p.beta_u >= 0.0,
          "alpha_g, alpha_s, alpha_u and beta_u must be nonnegative");
    if (p.has_thermal()) {
        const double init = p.initial_output();
        check(init >= p.pg_min && init <= p.pg_max, "pg_init must lie within the output bounds");
    }
    check(p.pd_flex_max.empty() || static_cast<int>(p.pd_flex_max.size()) == horizon,
          "pd_flex_max must have one entry per period");
    for (double cap : p.pd_flex_max) {
        if (!(cap >= 0.0)) {
            out.emplace_back("pd_flex_max entries must be nonnegative");
            break;
        }
    }
    return out;
}

ConstraintBlock thermal_block(const ProsumerParams& p, int s, int t, const VariableMap& vars) {
    ConstraintBlock blk;
    const int i = p.i;
    const int pg = vars.at(Symbol::Pg, s, i, t);
    const int pr = vars.at(Symbol::Pr, s, i, t);
    if (!p.has_thermal()) {
        blk.eq({RowTag::ThermalFixed, s, i, t}, {{pg, 1.0}}, 0.0);
        blk.eq({RowTag::ReserveFixed, s, i, t}, {{pr, 1.0}}, 0.0);
        return blk;
    }
    blk.box(RowTag::ThermalLower, RowTag::ThermalUpper, RowTag::ThermalFixed, s, i, t, pg, p.pg_min, p.pg_max);

    const bool reserve = p.reserve_cap() > 0.0;
    if (reserve) {
        blk.le({RowTag::ReserveLower, s, i, t}, {{pr, -1.0}}, 0.0);
        blk.le({RowTag::ReserveRate, s, i, t}, {{pr, 1.0}}, p.reserve_cap());
        blk.le({RowTag::ReserveHeadroom, s, i, t}, {{pr, 1.0}, {pg, 1.0}}, p.pg_max);
    } else {
        blk.eq({RowTag::ReserveFixed, s, i, t}, {{pr, 1.0}}, 0.0);
    }

    // ramps; before the horizon the unit sits at pg_init with no reserve
    std::vector<Term> up{{pg, 1.0}};
    std::vector<Term> down{{pg, -1.0}};
    double up_rhs = p.ru;
    double down_rhs = p.rd;
    if (reserve) up.push_back({pr, 1.0});
    if (t == 0) {
        up_rhs += p.initial_output();
        down_rhs -= p.initial_output();
    } else {
        up.push_back({vars.at(Symbol::Pg, s, i, t - 1), -1.0});
        down.push_back({vars.at(Symbol::Pg, s, i, t - 1), 1.0});
        if (reserve) down.push_back({vars.at(Symbol::Pr, s, i, t - 1), 1.0});
    }
    blk.le({RowTag::RampUp, s, i, t}, std::move(up), up_rhs);
    blk.le({RowTag::RampDown, s, i, t}, std::move(down), down_rhs);
    return blk;
}

ConstraintBlock storage_block(const ProsumerParams& p, int s, int t, const VariableMap& vars) {
    ConstraintBlock blk;
    const int i = p.i;
    const int pc = vars.at(Symbol::Pc, s, i, t);
    const int pdis = vars.at(Symbol::Pdis, s, i, t);
    const int qs = vars.at(Symbol::QS, s, i, t);
    const int d = vars.at(Symbol::Deg, s, i, t);
    if (!p.has_storage()) {
        blk.eq({RowTag::StorageFixed, s, i, t}, {{pc, 1.0}}, 0.0);
        blk.eq({RowTag::StorageFixed, s, i, t}, {{pdis, 1.0}}, 0.0);
        blk.eq({RowTag::StorageFixed, s, i, t}, {{d, 1.0}}, 0.0);
        blk.eq({RowTag::StorageFixed, s, i, t}, {{qs, 1.0}}, p.initial_energy());
        return blk;
    }
    blk.box(RowTag::ChargeLower, RowTag::ChargeUpper, RowTag::ChargeUpper, s, i, t, pc, 0.0, p.ps_max);
    blk.box(RowTag::DischargeLower, RowTag::DischargeUpper, RowTag::DischargeUpper, s, i, t, pdis, 0.0, p.ps_max);

    if (t == 0) {
        blk.eq({RowTag::EnergyInitial, s, i, t}, {{qs, 1.0}}, p.initial_energy());
    } else {
        blk.eq({RowTag::EnergyRecursion, s, i, t},
               {{qs, 1.0},
                {vars.at(Symbol::QS, s, i, t - 1), -1.0},
                {vars.at(Symbol::Pc, s, i, t - 1), -1.0},
                {vars.at(Symbol::Pdis, s, i, t - 1), 1.0}},
               0.0);
        blk.box(RowTag::EnergyLower, RowTag::EnergyUpper, RowTag::EnergyUpper, s, i, t, qs, p.q_min, p.q_cap);
    }
    if (t == vars.dims().horizon - 1) {
        // the state after the last period must also respect the capacity box
        blk.le({RowTag::TerminalEnergyUpper, s, i, t}, {{qs, 1.0}, {pc, 1.0}, {pdis, -1.0}}, p.q_cap);
        blk.le({RowTag::TerminalEnergyLower, s, i, t}, {{qs, -1.0}, {pc, -1.0}, {pdis, 1.0}}, -p.q_min);
    }
    blk.le({RowTag::Degradation, s, i, t}, {{pc, 1.0}, {pdis, 1.0}, {d, -1.0}}, 0.0);
    blk.le({RowTag::DegradationUpper, s, i, t}, {{d, 1.0}}, 2.0 * p.ps_max);
    return blk;
}

ConstraintBlock flexdemand_block(const ProsumerParams& p, int s, int t, const VariableMap& vars) {
    ConstraintBlock blk;
    const int pd = vars.at(Symbol::PD, s, p.i, t);
    blk.box(RowTag::CurtailLower, RowTag::CurtailUpper, RowTag::CurtailFixed, s, p.i, t, pd, 0.0, p.flex_cap(t));
    return blk;
}

ConstraintBlock balance_block(const ProsumerParams& p, double pb_mw, double pv_mw, double load_mw, int s,
                              int t, const VariableMap& vars) {
    ConstraintBlock blk;
    const int i = p.i;
    blk.eq({RowTag::Balance, s, i, t},
           {{vars.at(Symbol::Pg, s, i, t), 1.0},
            {vars.at(Symbol::Pdis, s, i, t), p.eta},
            {vars.at(Symbol::Pc, s, i, t), -1.0 / p.eta},
            {vars.at(Symbol::PD, s, i, t), 1.0},
            {vars.at(Symbol::PE, s, i, t), -1.0}},
           load_mw - pv_mw + pb_mw);
    return blk;
}

double utility(const ProsumerParams& p, double load_mw, double curtailed_mw) {
    const double served = load_mw - curtailed_mw;
    return -p.alpha_u * served * served + p.beta_u * served;
}

double generation_cost(const ProsumerParams& p, double pg_mw) { return p.alpha_g * pg_mw * pg_mw + p.beta_g * pg_mw; }

double degradation_cost(const ProsumerParams& p, double pc_mw, double pdis_mw) {
    if (!p.has_storage()) return 0.0;
    return p.alpha_s * std::abs(pdis_mw - pc_mw) + p.beta_s;
}

void add_prosumer_objective(ProgramBuilder& pb, const ProsumerParams& p, int s, int t, double omega,
                            double load_mw, const VariableMap& vars) {
    const int i = p.i;
    const int pg = vars.at(Symbol::Pg, s, i, t);
    const int pd = vars.at(Symbol::PD, s, i, t);
    const int d = vars.at(Symbol::Deg, s, i, t);
    // generation cost
    if (p.alpha_g != 0.0) pb.add_quadratic(pg, pg, omega * p.alpha_g);
    if (p.beta_g != 0.0) pb.add_linear(pg, omega * p.beta_g);
    // minus utility: alpha_u (d - D)^2 - beta_u (d - D)
    if (p.alpha_u != 0.0) pb.add_quadratic(pd, pd, omega * p.alpha_u);
    const double lin_pd = p.beta_u - 2.0 * p.alpha_u * load_mw;
    if (lin_pd != 0.0) pb.add_linear(pd, omega * lin_pd);
    pb.add_constant(omega * (p.alpha_u * load_mw * load_mw - p.beta_u * load_mw));
    // degradation
    if (p.has_storage()) {
        if (p.alpha_s != 0.0) pb.add_linear(d, omega * p.alpha_s);
        pb.add_constant(omega * p.beta_s);
    }
}

}  // namespace dso
