#include "doctest.h"

#include "dso/case.hpp"
#include "dso/der.hpp"
#include "dso/dispatch.hpp"
#include "dso/solver.hpp"
#include "oracle.hpp"

#include <cmath>

using namespace dso;

namespace {

ModelDims one_prosumer(int T) {
    ModelDims d;
    d.n_scenarios = 1;
    d.n_prosumers = 1;
    d.n_buses = 1;
    d.n_branches = 0;
    d.horizon = T;
    return d;
}

ProsumerParams table_thermal() {
    ProsumerParams p;
    p.pg_min = 0.25;
    p.pg_max = 5.0;
    p.msr = 0.05;
    p.ru = 5.0;
    p.rd = 5.0;
    p.pg_init = 2.5;
    return p;
}

ProsumerParams table_storage() {
    ProsumerParams p;
    p.ps_max = 0.25;
    p.eta = 0.9;
    p.q_cap = 1.25;
    p.q_min = 0.0;
    p.q_init = 0.0;
    return p;
}

double row_residual(const LinearRow& r, const Eigen::VectorXd& x) {
    double acc = -r.rhs;
    for (const Term& t : r.terms) acc += t.coef * x[t.var];
    return acc;
}

const LinearRow* find_row(const ConstraintBlock& b, RowTag tag) {
    for (const LinearRow& r : b.rows) {
        if (r.id.tag == tag) return &r;
    }
    return nullptr;
}

/// Maximizes one column subject to the thermal rows of every period and extra fixings.
double maximize_thermal(const ProsumerParams& p, int T, int objective_col,
                        const std::vector<std::pair<int, double>>& fixed) {
    const VariableMap vars(one_prosumer(T));
    ProgramBuilder pb(vars.size());
    for (int t = 0; t < T; ++t) pb.add(thermal_block(p, 0, t, vars));
    ConstraintBlock fix;
    for (const auto& [col, v] : fixed) fix.eq({RowTag::Generic, 0, col, 0}, {{col, 1.0}}, v);
    pb.add(std::move(fix));
    pb.add_linear(objective_col, -1.0);
    const ConicProgram prog = std::move(pb).seal();
    const SolveReport r = solve(prog);
    REQUIRE(r.status == SolveStatus::Optimal);
    return r.primal[objective_col];
}

}  // namespace

TEST_CASE("reserve cap of the reference thermal unit is min(0.5, 5 - Pg)") {
    const ProsumerParams p = table_thermal();
    const VariableMap vars(one_prosumer(1));
    const int pg = vars.at(Symbol::Pg, 0, 0, 0);
    const int pr = vars.at(Symbol::Pr, 0, 0, 0);
    for (double out : {0.25, 2.0, 4.5, 4.8, 5.0}) {
        const double best = maximize_thermal(p, 1, pr, {{pg, out}});
        CHECK(best == doctest::Approx(std::min(0.5, 5.0 - out)).epsilon(1e-7));
    }
    CHECK(p.reserve_cap() == doctest::Approx(0.5));
}

TEST_CASE("absent thermal unit fixes output and reserve to zero") {
    ProsumerParams p;
    const VariableMap vars(one_prosumer(1));
    const ConstraintBlock b = thermal_block(p, 0, 0, vars);
    CHECK(b.count(RowTag::ThermalFixed) == 1);
    CHECK(b.count(RowTag::ReserveFixed) == 1);
    CHECK(b.count(RowTag::RampUp) == 0);
    const int pg = vars.at(Symbol::Pg, 0, 0, 0);
    const int pr = vars.at(Symbol::Pr, 0, 0, 0);
    CHECK(std::abs(maximize_thermal(p, 1, pg, {})) <= 1e-8);
    CHECK(std::abs(maximize_thermal(p, 1, pr, {})) <= 1e-8);
}

TEST_CASE("ramp-up face with reserve: Pg(t-1) = 1.0, ru = 1.5, Pr = 0.3 gives Pg <= 2.2") {
    ProsumerParams p = table_thermal();
    p.ru = 1.5;
    p.pg_init = 1.0;
    const VariableMap vars(one_prosumer(2));
    const int pg0 = vars.at(Symbol::Pg, 0, 0, 0);
    const int pg1 = vars.at(Symbol::Pg, 0, 0, 1);
    const int pr1 = vars.at(Symbol::Pr, 0, 0, 1);
    const double best = maximize_thermal(p, 2, pg1, {{pg0, 1.0}, {pr1, 0.3}});
    CHECK(best == doctest::Approx(2.2).epsilon(1e-7));
}

TEST_CASE("storage rows of the reference storage unit") {
    const ProsumerParams p = table_storage();
    const VariableMap vars(one_prosumer(3));
    const ConstraintBlock b0 = storage_block(p, 0, 0, vars);
    const ConstraintBlock b1 = storage_block(p, 0, 1, vars);
    const ConstraintBlock b2 = storage_block(p, 0, 2, vars);
    REQUIRE(find_row(b0, RowTag::ChargeUpper));
    CHECK(find_row(b0, RowTag::ChargeUpper)->rhs == 0.25);
    CHECK(find_row(b0, RowTag::DischargeUpper)->rhs == 0.25);
    CHECK(find_row(b0, RowTag::ChargeLower)->rhs == 0.0);
    CHECK(find_row(b0, RowTag::EnergyInitial)->rhs == 0.0);
    CHECK(find_row(b1, RowTag::EnergyUpper)->rhs == 1.25);
    CHECK(find_row(b1, RowTag::EnergyLower)->rhs == 0.0);
    CHECK(b0.count(RowTag::TerminalEnergyUpper) == 0);
    CHECK(b2.count(RowTag::TerminalEnergyUpper) == 1);
    CHECK(b2.count(RowTag::TerminalEnergyLower) == 1);
    CHECK(b1.count(RowTag::Degradation) == 1);
}

TEST_CASE("energy recursion: charging 0.2 MW for one hour adds 0.2 MWh") {
    const ProsumerParams p = table_storage();
    const VariableMap vars(one_prosumer(2));
    const ConstraintBlock b = storage_block(p, 0, 1, vars);
    const LinearRow* rec = find_row(b, RowTag::EnergyRecursion);
    REQUIRE(rec);
    Eigen::VectorXd x = Eigen::VectorXd::Zero(vars.size());
    x[vars.at(Symbol::QS, 0, 0, 0)] = 0.4;
    x[vars.at(Symbol::Pc, 0, 0, 0)] = 0.2;
    x[vars.at(Symbol::QS, 0, 0, 1)] = 0.6;
    CHECK(std::abs(row_residual(*rec, x)) <= 1e-15);
    x[vars.at(Symbol::QS, 0, 0, 1)] = 0.4 + 0.2 * 0.9;
    CHECK(std::abs(row_residual(*rec, x)) > 1e-3);
}

TEST_CASE("discharging an empty store to cover load is infeasible") {
    ProsumerParams p = table_storage();
    p.q_init = p.q_min;
    // no market access and no other resource: the load can only come from the store
    const Instance inst = oracle::single_bus(p, {30.0}, {0.0}, {1.0}, {0.0}, 0.0);
    const SolvedCase sc = solve_case(inst, NetTradePlan(1, 1));
    CHECK(sc.report.status == SolveStatus::Infeasible);
}

TEST_CASE("curtailment rows") {
    ProsumerParams p;
    p.pd_flex_max = {0.3, 0.0};
    const VariableMap vars(one_prosumer(2));
    const ConstraintBlock b0 = flexdemand_block(p, 0, 0, vars);
    const ConstraintBlock b1 = flexdemand_block(p, 0, 1, vars);
    CHECK(find_row(b0, RowTag::CurtailUpper)->rhs == 0.3);
    CHECK(b0.count(RowTag::CurtailLower) == 1);
    CHECK(b1.count(RowTag::CurtailFixed) == 1);
}

TEST_CASE("utility, generation and degradation values") {
    ProsumerParams p;
    p.alpha_u = 1.0;
    p.beta_u = 10.0;
    CHECK(utility(p, 2.0, 0.5) == doctest::Approx(12.75));
    ProsumerParams none;
    CHECK(utility(none, 2.0, 0.5) == 0.0);
    p.alpha_g = 4.0;
    p.beta_g = 18.0;
    CHECK(generation_cost(p, 2.0) == doctest::Approx(52.0));
    p.alpha_s = 2.0;
    p.beta_s = 0.5;
    p.ps_max = 0.25;
    p.q_cap = 1.0;
    CHECK(degradation_cost(p, 0.0, 0.2) == doctest::Approx(0.9));
    CHECK(degradation_cost(p, 0.2, 0.0) == doctest::Approx(0.9));
    ProsumerParams no_store;
    no_store.alpha_s = 2.0;
    no_store.beta_s = 0.5;
    CHECK(degradation_cost(no_store, 0.0, 0.0) == 0.0);
}

TEST_CASE("balance identities") {
    const VariableMap vars(one_prosumer(1));
    const int pe = vars.at(Symbol::PE, 0, 0, 0);
    SUBCASE("pure buyer") {
        ProsumerParams p;
        const ConstraintBlock b = balance_block(p, 0.0, 0.0, 1.0, 0, 0, vars);
        Eigen::VectorXd x = Eigen::VectorXd::Zero(vars.size());
        x[pe] = -1.0;
        CHECK(std::abs(row_residual(b.rows.at(0), x)) <= 1e-15);
    }
    SUBCASE("trade absorbs the surplus") {
        ProsumerParams p = table_thermal();
        const ConstraintBlock b = balance_block(p, 2.0, 1.0, 1.0, 0, 0, vars);
        Eigen::VectorXd x = Eigen::VectorXd::Zero(vars.size());
        x[vars.at(Symbol::Pg, 0, 0, 0)] = 2.0;
        x[pe] = 0.0;
        CHECK(std::abs(row_residual(b.rows.at(0), x)) <= 1e-15);
    }
}

TEST_CASE("a seller committed beyond its resources buys from the market") {
    ProsumerParams p = table_thermal();
    p.alpha_g = 1.0;
    p.beta_g = 10.0;
    Instance inst = oracle::single_bus(p, {30.0, 30.0}, {1.0, 1.0}, {0.5, 0.5}, {0.0, 0.0});
    inst.prosumers[0].pd_flex_max = {0.0, 0.0};
    NetTradePlan plan(1, 2);
    plan.pb = {7000, 7000};
    plan.imbalance = {7000, 7000};
    const SolvedCase sc = solve_case(inst, plan);
    REQUIRE(sc.report.status == SolveStatus::Optimal);
    for (int t = 0; t < 2; ++t) CHECK(sc.result.PE[sc.result.at_sit(0, 0, t)] < 0.0);
}

TEST_CASE("storage state telescopes and stays inside its box on the two-bus case") {
    const Instance inst = make_instance(make_two_bus_case());
    const SolvedCase sc = solve_case(inst, NetTradePlan(2, inst.horizon()));
    REQUIRE(sc.report.status == SolveStatus::Optimal);
    const DispatchResult& r = sc.result;
    const int T = inst.horizon();
    for (const ProsumerParams& p : inst.prosumers) {
        REQUIRE(p.has_storage());
        for (int s = 0; s < inst.scenarios.n_scenarios; ++s) {
            double q = p.initial_energy();
            for (int t = 0; t < T; ++t) {
                const std::size_t k = r.at_sit(s, p.i, t);
                CHECK(std::abs(r.QS[k] - q) <= 1e-7);
                q += r.Pc[k] - r.Pdis[k];
                CHECK(q >= p.q_min - 1e-7);
                CHECK(q <= p.q_cap + 1e-7);
            }
        }
    }
}

TEST_CASE("degradation epigraph is tight at the optimum") {
    const Instance inst = make_instance(make_two_bus_case());
    const SolvedCase sc = solve_case(inst, NetTradePlan(2, inst.horizon()));
    REQUIRE(sc.report.status == SolveStatus::Optimal);
    CHECK(degradation_slack(sc.result).value <= 1e-6);
    CHECK(complementarity_gap(sc.result).value <= 1e-6);
}

TEST_CASE("zero-capacity resources stay at zero in the solved dispatch") {
    CaseFile c = make_two_bus_case();
    c.prosumers[0].ps_max = 0.0;
    c.prosumers[0].q_cap = 0.0;
    const Instance inst = make_instance(c);
    const SolvedCase sc = solve_case(inst, NetTradePlan(2, inst.horizon()));
    REQUIRE(sc.report.status == SolveStatus::Optimal);
    const DispatchResult& r = sc.result;
    for (int s = 0; s < inst.scenarios.n_scenarios; ++s) {
        for (int t = 0; t < inst.horizon(); ++t) {
            const std::size_t k0 = r.at_sit(s, 0, t);
            const std::size_t k1 = r.at_sit(s, 1, t);
            CHECK(std::abs(r.Pc[k0]) <= 1e-9);
            CHECK(std::abs(r.Pdis[k0]) <= 1e-9);
            CHECK(std::abs(r.Deg[k0]) <= 1e-9);
            // the buyer has no generator
            CHECK(std::abs(r.Pg[k1]) <= 1e-9);
            CHECK(std::abs(r.Pr[k1]) <= 1e-9);
            CHECK(std::abs(r.PD[k0]) <= 1e-9);
        }
    }
}

TEST_CASE("parameter validation") {
    ProsumerParams p = table_thermal();
    p.pd_flex_max.assign(2, 0.0);
    CHECK(validate_prosumer(p, 2).empty());
    p.eta = 1.2;
    CHECK(!validate_prosumer(p, 2).empty());
    p.eta = 0.9;
    p.pg_min = 6.0;
    CHECK(!validate_prosumer(p, 2).empty());
}
