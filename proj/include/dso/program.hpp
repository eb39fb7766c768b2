#pragma once

// Solver-agnostic conic program:
//
//   minimize    1/2 x'Px + q'x + constant
//   subject to  Ax + s = b,  s in K = {0}^m0 x R+^m1 x SOC(d1) x ... x SOC(dk)
//
// Models are emitted as ConstraintBlocks (linear rows + cone memberships over
// named variables) and sealed into a ConicProgram by ProgramBuilder.

#include <Eigen/Sparse>

#include <array>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace dso {

class AssemblyError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::ColMajor, int>;

// ---------------------------------------------------------------------------
// Variables

enum class Symbol : std::uint8_t {
    E,     // energy offered to the wholesale market (t)
    R,     // upward reserve offered (t)
    Pg,    // thermal output (s, prosumer, t)
    Pr,    // thermal upward reserve
    Pc,    // storage charge
    Pdis,  // storage discharge
    PD,    // load curtailment
    PE,    // prosumer output towards the energy market
    QS,    // storage energy state
    Deg,   // storage degradation epigraph
    V,     // squared voltage magnitude (s, bus, t)
    Pf,    // branch active flow, sending end (s, branch, t)
    Qf,    // branch reactive flow
    L,     // squared branch current
    Psub,  // substation active exchange through the virtual feeder (s, t)
    Qsub,  // substation reactive exchange
};

inline constexpr std::array<Symbol, 16> kAllSymbols = {
    Symbol::E,  Symbol::R,  Symbol::Pg, Symbol::Pr, Symbol::Pc,   Symbol::Pdis,
    Symbol::PD, Symbol::PE, Symbol::QS, Symbol::Deg, Symbol::V,   Symbol::Pf,
    Symbol::Qf, Symbol::L,  Symbol::Psub, Symbol::Qsub};

enum class IndexDomain { Time, Prosumer, Bus, Branch, Substation };

std::string_view symbol_name(Symbol s);
IndexDomain symbol_domain(Symbol s);

struct VarKey {
    Symbol sym;
    int s = 0;
    int idx = 0;
    int t = 0;
    friend bool operator==(const VarKey&, const VarKey&) = default;
};

struct ModelDims {
    int n_scenarios = 1;
    int n_prosumers = 0;
    int n_buses = 0;
    int n_branches = 0;
    int horizon = 1;
};

/// Bijection between indexed model symbols and flat solver columns.
///
/// Columns are laid out symbol-major, then scenario, then element, then time,
/// so the layout depends only on the dimensions and the registered symbols.
class VariableMap {
public:
    VariableMap() = default;
    explicit VariableMap(ModelDims dims, std::span<const Symbol> symbols = kAllSymbols);

    const ModelDims& dims() const { return dims_; }
    int size() const { return size_; }
    bool has(Symbol sym) const { return offset_[static_cast<int>(sym)] >= 0; }
    int count(Symbol sym) const;

    /// Column for (sym, s, idx, t). Throws AssemblyError naming the symbol when
    /// the symbol is not registered or an index is out of range.
    int at(Symbol sym, int s, int idx, int t) const;
    /// Column of an ex-ante (time-only) symbol.
    int at(Symbol sym, int t) const;
    /// Column of a per-scenario substation symbol.
    int at_st(Symbol sym, int s, int t) const;

    VarKey key(int col) const;
    std::string name(int col) const;

private:
    int extent(Symbol sym) const;

    ModelDims dims_{};
    std::array<int, kAllSymbols.size()> offset_{};
    std::array<Symbol, kAllSymbols.size()> order_{};
    int n_registered_ = 0;
    int size_ = 0;
};

// ---------------------------------------------------------------------------
// Constraint blocks

struct Term {
    int var;
    double coef;
};

struct Affine {
    std::vector<Term> terms;
    double constant = 0.0;

    Affine() = default;
    explicit Affine(double c) : constant(c) {}
    Affine& add(int var, double coef) {
        terms.push_back({var, coef});
        return *this;
    }
};

enum class RowTag : std::uint8_t {
    // network
    ActiveInjection,
    ReactiveInjection,
    VoltageDrop,
    VoltageLower,
    VoltageUpper,
    SubstationVoltage,
    // thermal
    ThermalLower,
    ThermalUpper,
    ThermalFixed,
    ReserveLower,
    ReserveRate,
    ReserveHeadroom,
    ReserveFixed,
    RampUp,
    RampDown,
    // storage
    ChargeLower,
    ChargeUpper,
    DischargeLower,
    DischargeUpper,
    StorageFixed,
    EnergyInitial,
    EnergyRecursion,
    EnergyLower,
    EnergyUpper,
    TerminalEnergyLower,
    TerminalEnergyUpper,
    Degradation,
    DegradationUpper,
    // flexible demand
    CurtailLower,
    CurtailUpper,
    CurtailFixed,
    // balance and market
    Balance,
    MarketEnergy,
    MarketReserve,
    ExchangeUpper,
    ExchangeLower,
    ExchangeReserveUpper,
    ExchangeReserveLower,
    Generic,
};

enum class ConeTag : std::uint8_t { Loss, Flow, Generic };

std::string_view row_tag_name(RowTag t);
std::string_view cone_tag_name(ConeTag t);

struct RowId {
    RowTag tag = RowTag::Generic;
    int s = 0;
    int idx = 0;
    int t = 0;
};

enum class Sense : std::uint8_t { Eq, Le };

/// sum(terms) == rhs  or  sum(terms) <= rhs
struct LinearRow {
    RowId id;
    Sense sense = Sense::Eq;
    std::vector<Term> terms;
    double rhs = 0.0;
};

/// members[0] >= || members[1..] ||_2
struct ConeRow {
    ConeTag tag = ConeTag::Generic;
    int s = 0;
    int idx = 0;
    int t = 0;
    std::vector<Affine> members;
};

struct ConstraintBlock {
    std::vector<LinearRow> rows;
    std::vector<ConeRow> cones;

    void eq(RowId id, std::vector<Term> terms, double rhs) {
        rows.push_back({id, Sense::Eq, std::move(terms), rhs});
    }
    void le(RowId id, std::vector<Term> terms, double rhs) {
        rows.push_back({id, Sense::Le, std::move(terms), rhs});
    }
    /// lo <= x <= hi, collapsed to an equality when lo == hi.
    void box(RowTag lower, RowTag upper, RowTag fixed, int s, int idx, int t, int var, double lo,
             double hi);

    std::size_t count(RowTag tag) const;
    std::size_t count(ConeTag tag) const;
    void append(ConstraintBlock&& other);
};

// ---------------------------------------------------------------------------
// Sealed program

enum class ConeKind : std::uint8_t { Zero, Nonneg, Soc };

struct ConicProgram {
    int n = 0;
    SparseMatrix P;  // upper triangle of the symmetric objective Hessian
    Eigen::VectorXd q;
    double constant = 0.0;

    SparseMatrix A;
    Eigen::VectorXd b;
    int n_zero = 0;
    int n_nonneg = 0;
    std::vector<int> soc_dims;
    std::vector<int> soc_offsets;  // first row of each SOC block

    std::vector<RowId> row_ids;    // zero + nonneg rows, in row order
    std::vector<ConeRow> cone_ids;  // tags/indices of each SOC block (members cleared)

    int m() const { return static_cast<int>(A.rows()); }
    int degree() const { return n_nonneg + static_cast<int>(soc_dims.size()); }

    /// 1/2 x'Px + q'x + constant
    double objective(const Eigen::VectorXd& x) const;
    /// Full symmetric P applied to x.
    Eigen::VectorXd hessian_times(const Eigen::VectorXd& x) const;
};

/// Collects blocks and objective terms, then seals them into a ConicProgram
/// with rows ordered by (cone kind, tag, s, index, t).
class ProgramBuilder {
public:
    explicit ProgramBuilder(int n_vars);

    void add(ConstraintBlock&& block);

    /// Adds coef * x_i * x_j to the objective (coef * x_i^2 when i == j).
    void add_quadratic(int i, int j, double coef);
    void add_linear(int i, double coef);
    void add_constant(double c) { constant_ += c; }

    ConicProgram seal() &&;

private:
    void check_var(int v) const;

    int n_;
    std::vector<LinearRow> rows_;
    std::vector<ConeRow> cones_;
    std::vector<Eigen::Triplet<double>> quad_;
    Eigen::VectorXd lin_;
    double constant_ = 0.0;
};

/// Writes the program in Conic Benchmark Format (CBF v3). Quadratic objective
/// terms are rewritten as rotated-cone epigraphs; P must be diagonal.
void write_cbf(std::ostream& os, const ConicProgram& prog);

}  // namespace dso
