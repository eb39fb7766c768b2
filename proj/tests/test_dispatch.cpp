#include "doctest.h"

#include "dso/case.hpp"
#include "dso/dispatch.hpp"
#include "oracle.hpp"

#include <cmath>

using namespace dso;

namespace {

DispatchResult one_branch_point(const Network& net) {
    DispatchResult r;
    r.status = SolveStatus::Optimal;
    r.dims.n_scenarios = 1;
    r.dims.n_prosumers = 2;
    r.dims.n_buses = net.n_buses();
    r.dims.n_branches = net.n_branches();
    r.dims.horizon = 1;
    r.p_flow = {0.3};
    r.q_flow = {0.4};
    r.v = {1.0, 1.0};
    r.l = {0.25};
    r.Pc = {0.0, 0.0};
    r.Pdis = {0.0, 0.0};
    r.Deg = {0.0, 0.0};
    return r;
}

}  // namespace

TEST_CASE("relaxation gap is zero on the cone boundary") {
    const Network net = make_two_bus_case().network;
    const DispatchResult r = one_branch_point(net);
    CHECK(std::abs(relaxation_gap(r, net).value) <= 1e-15);
}

TEST_CASE("inflated current shows up as the gap at that branch") {
    const Network net = make_two_bus_case().network;
    DispatchResult r = one_branch_point(net);
    r.l[0] += 0.01;
    const GapLocation g = relaxation_gap(r, net);
    CHECK(g.value == doctest::Approx(0.01).epsilon(1e-12));
    CHECK(g.idx == 0);
    CHECK(g.s == 0);
    CHECK(g.t == 0);
}

TEST_CASE("gap uses the receiving-end voltage") {
    const Network net = make_two_bus_case().network;
    DispatchResult r = one_branch_point(net);
    r.v = {1.0, 0.5};
    r.l = {0.5};
    CHECK(std::abs(relaxation_gap(r, net).value) <= 1e-15);
}

TEST_CASE("simultaneous charge and discharge product") {
    const Network net = make_two_bus_case().network;
    DispatchResult r = one_branch_point(net);
    CHECK(complementarity_gap(r).value == 0.0);
    r.Pc[1] = 0.1;
    r.Pdis[1] = 0.1;
    const GapLocation g = complementarity_gap(r);
    CHECK(g.value == doctest::Approx(0.01));
    CHECK(g.idx == 1);
    r.Deg[1] = 0.2;
    CHECK(degradation_slack(r).value == doctest::Approx(0.2));
}

TEST_CASE("surplus recomputation from a hand-built dispatch") {
    ProsumerParams p;
    p.pg_min = 0.0;
    p.pg_max = 3.0;
    p.msr = 0.1;
    p.ru = 5.0;
    p.rd = 5.0;
    p.alpha_g = 1.0;
    p.beta_g = 2.0;
    p.pd_flex_max = {0.5};
    p.alpha_u = 1.0;
    p.beta_u = 10.0;
    p.ps_max = 0.5;
    p.q_cap = 1.0;
    p.alpha_s = 2.0;
    p.beta_s = 0.5;
    const Instance inst = oracle::single_bus(p, {30.0}, {1.5}, {2.0}, {0.0});
    DispatchResult r;
    r.dims = inst.dims();
    r.E = {1.0};
    r.R = {0.5};
    r.Pg = {2.0};
    r.Pr = {0.5};
    r.PD = {0.5};
    r.Pc = {0.0};
    r.Pdis = {0.2};
    r.Deg = {0.3};  // the epigraph value is ignored
    r.PE = {1.0};
    r.QS = {0.5};
    const SurplusBreakdown b = objective_value(r, inst);
    CHECK(b.energy_revenue == doctest::Approx(30.0));
    CHECK(b.reserve_revenue == doctest::Approx(0.75));
    CHECK(b.utility == doctest::Approx(-2.25 + 15.0));
    CHECK(b.generation_cost == doctest::Approx(4.0 + 4.0));
    CHECK(b.degradation_cost == doctest::Approx(0.4 + 0.5));
    CHECK(b.total() == doctest::Approx(30.0 + 0.75 + 12.75 - 8.0 - 0.9));
}

TEST_CASE("solved two-bus case: feasibility, objective recomputation and exactness") {
    const Instance inst = make_instance(make_two_bus_case());
    const SolvedCase sc = solve_case(inst, NetTradePlan(2, inst.horizon()));
    REQUIRE(sc.report.status == SolveStatus::Optimal);
    CHECK(check_feasibility(sc.problem.prog, sc.report.primal).worst() <= 1e-8);
    const double recomputed = objective_value(sc.result, inst).total();
    CHECK(std::abs(recomputed + sc.report.objective) <= 1e-6);
    CHECK(std::abs(sc.result.surplus.total() - recomputed) <= 1e-12);
    CHECK(relaxation_gap(sc.result, inst.net).value <= 5e-4);
    CHECK(complementarity_gap(sc.result).value <= 1e-6);
}

TEST_CASE("repeated solves agree") {
    const Instance inst = make_instance(make_two_bus_case());
    const SolvedCase a = solve_case(inst, NetTradePlan(2, inst.horizon()));
    const SolvedCase b = solve_case(inst, NetTradePlan(2, inst.horizon()));
    REQUIRE(a.report.status == SolveStatus::Optimal);
    CHECK(std::abs(a.report.objective - b.report.objective) <= 1e-9);
    CHECK((a.report.primal - b.report.primal).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("non-optimal reports leave the dispatch empty") {
    ProsumerParams p;
    p.ps_max = 0.25;
    p.eta = 0.9;
    p.q_cap = 1.0;
    const Instance inst = oracle::single_bus(p, {30.0}, {0.0}, {1.0}, {0.0}, 0.0);
    const SolvedCase sc = solve_case(inst, NetTradePlan(1, 1));
    CHECK(sc.report.status == SolveStatus::Infeasible);
    CHECK(sc.result.status == SolveStatus::Infeasible);
    CHECK(sc.result.E.empty());
    CHECK(sc.result.Pg.empty());
}
