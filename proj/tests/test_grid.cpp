#include "doctest.h"

#include "dso/case.hpp"
#include "dso/dispatch.hpp"
#include "dso/grid.hpp"
#include "dso/solver.hpp"

#include <cmath>
#include <numeric>
#include <random>

using namespace dso;

namespace {

Network two_bus_net() { return make_two_bus_case().network; }

ModelDims dims_of(const Network& net, int n_prosumers) {
    ModelDims d;
    d.n_scenarios = 1;
    d.n_prosumers = n_prosumers;
    d.n_buses = net.n_buses();
    d.n_branches = net.n_branches();
    d.horizon = 1;
    return d;
}

int prosumer_count(const Network& net) {
    int n = 0;
    for (const Bus& b : net.buses) n += b.prosumer ? 1 : 0;
    return n;
}

NodalInputs zero_inputs(const Network& net) {
    NodalInputs in;
    in.pb_mw.assign(net.n_buses(), 0.0);
    in.qd_mvar.assign(net.n_buses(), 0.0);
    return in;
}

Network random_tree(std::mt19937_64& rng, int n) {
    Network net;
    net.e_ex_max = 10.0;
    for (int k = 0; k < n; ++k) {
        Bus b;
        b.id = k;
        b.is_substation = k == 0;
        net.buses.push_back(b);
    }
    for (int k = 1; k < n; ++k) {
        Branch br;
        br.from = std::uniform_int_distribution<int>(0, k - 1)(rng);
        br.to = k;
        br.r = 0.01;
        br.x = 0.01;
        br.smax = 5.0;
        net.branches.push_back(br);
    }
    return net;
}

}  // namespace

TEST_CASE("two-bus network is valid") {
    const ValidationReport r = validate_network(two_bus_net());
    CHECK(r.ok());
    CHECK(r.summary().empty());
}

TEST_CASE("two buses without a branch are disconnected") {
    Network net = two_bus_net();
    net.branches.clear();
    const ValidationReport r = validate_network(net);
    CHECK(r.has("disconnected"));
}

TEST_CASE("triangle is reported as a cycle") {
    Network net;
    net.e_ex_max = 1.0;
    for (int k = 0; k < 3; ++k) {
        Bus b;
        b.id = k;
        b.is_substation = k == 0;
        net.buses.push_back(b);
    }
    auto branch = [](int f, int t) {
        Branch br;
        br.from = f;
        br.to = t;
        br.r = 0.01;
        br.x = 0.01;
        br.smax = 1.0;
        return br;
    };
    net.branches = {branch(0, 1), branch(0, 2), branch(1, 2)};
    const ValidationReport r = validate_network(net);
    CHECK(r.has("non-radial (cycle)"));
}

TEST_CASE("structural violations are all reported") {
    Network net = two_bus_net();
    net.buses[0].is_substation = false;
    net.buses[1].vmin = 1.2;
    net.branches[0].smax = 0.0;
    const ValidationReport r = validate_network(net);
    CHECK(r.has("missing substation"));
    CHECK(r.has("bad bounds"));
    Network two = two_bus_net();
    two.buses[1].is_substation = true;
    CHECK(validate_network(two).has("multiple substations"));
    Network dup = two_bus_net();
    dup.buses[0].prosumer = 1;
    CHECK(validate_network(dup).has("duplicate prosumer"));
}

TEST_CASE("random trees rooted at the substation are radial; an extra edge breaks radiality") {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 50; ++trial) {
        const int n = std::uniform_int_distribution<int>(2, 40)(rng);
        Network net = random_tree(rng, n);
        CHECK(validate_network(net).ok());
        Branch extra = net.branches.back();
        extra.from = 0;
        extra.to = n - 1;
        net.branches.push_back(extra);
        CHECK(!validate_network(net).ok());
    }
}

TEST_CASE("distflow rows for one period of the two-bus network") {
    const Network net = two_bus_net();
    const VariableMap vars(dims_of(net, prosumer_count(net)));
    const ConstraintBlock b = build_distflow_block(net, zero_inputs(net), 0, 0, vars);
    CHECK(b.count(RowTag::ActiveInjection) == 2);
    CHECK(b.count(RowTag::ReactiveInjection) == 2);
    CHECK(b.count(ConeTag::Loss) == 1);
    CHECK(b.count(RowTag::VoltageDrop) == 1);
    CHECK(b.count(ConeTag::Flow) == 1);
    CHECK(b.count(RowTag::VoltageLower) == 2);
    CHECK(b.count(RowTag::VoltageUpper) == 2);
    CHECK(b.count(RowTag::SubstationVoltage) == 1);
}

TEST_CASE("distflow rows for one period of the 95-bus network") {
    const Network net = make_ukgds95_case().network;
    REQUIRE(net.n_buses() == 95);
    REQUIRE(validate_network(net).ok());
    const VariableMap vars(dims_of(net, prosumer_count(net)));
    const ConstraintBlock b = build_distflow_block(net, zero_inputs(net), 0, 0, vars);
    CHECK(b.count(RowTag::ActiveInjection) == 95);
    CHECK(b.count(RowTag::ReactiveInjection) == 95);
    CHECK(b.count(ConeTag::Loss) == 94);
    CHECK(b.count(RowTag::VoltageDrop) == 94);
    CHECK(b.count(ConeTag::Flow) == 94);
    CHECK(b.count(RowTag::VoltageLower) == 95);
    CHECK(b.count(RowTag::VoltageUpper) == 95);
}

TEST_CASE("missing variables are named in the assembly error") {
    const Network net = two_bus_net();
    const std::array<Symbol, 2> partial{Symbol::V, Symbol::Pf};
    const VariableMap vars(dims_of(net, prosumer_count(net)), partial);
    CHECK_THROWS_WITH_AS(build_distflow_block(net, zero_inputs(net), 0, 0, vars), doctest::Contains("q_kj"),
                         AssemblyError);
}

TEST_CASE("zero flows with propagated voltage satisfy the zero case") {
    Network net = two_bus_net();
    net.branches[0].gamma = 0.98;
    const VariableMap vars(dims_of(net, prosumer_count(net)));
    ProgramBuilder pb(vars.size());
    pb.add(build_distflow_block(net, zero_inputs(net), 0, 0, vars));
    const ConicProgram prog = std::move(pb).seal();
    Eigen::VectorXd x = Eigen::VectorXd::Zero(vars.size());
    const double v0 = net.v_ref * net.v_ref;
    x[vars.at(Symbol::V, 0, 0, 0)] = v0;
    x[vars.at(Symbol::V, 0, 1, 0)] = 0.98 * v0;
    CHECK(check_feasibility(prog, x).worst() <= 1e-12);
}

TEST_CASE("total loss sums r times l") {
    Network net = two_bus_net();
    net.branches[0].r = 0.01;
    DispatchResult r;
    r.dims = dims_of(net, 2);
    r.l.assign(1, 0.0);
    CHECK(total_loss(r, net, 0, 0) == 0.0);
    r.l[0] = 4.0;
    // 0.04 pu on the system base
    CHECK(total_loss(r, net, 0, 0) / net.s_base == doctest::Approx(0.04));
    CHECK(total_loss(r, net, 0, 0) == doctest::Approx(0.04 * net.s_base));
}

TEST_CASE("solved losses equal prosumer output minus market energy, and injections balance") {
    const Instance inst = make_instance(make_two_bus_case());
    const SolvedCase sc = solve_case(inst, NetTradePlan(2, inst.horizon()));
    REQUIRE(sc.report.status == SolveStatus::Optimal);
    const DispatchResult& r = sc.result;
    const double S = inst.net.s_base;
    for (int s = 0; s < inst.scenarios.n_scenarios; ++s) {
        for (int t = 0; t < inst.horizon(); ++t) {
            const double pe = r.PE[r.at_sit(s, 0, t)] + r.PE[r.at_sit(s, 1, t)];
            CHECK(std::abs(total_loss(r, inst.net, s, t) - (pe - r.E[t])) <= 1e-6);
            // downstream bus: the branch carries what the buyer draws plus the loss
            const double p = r.p_flow[r.at_sbt(s, 0, t)];
            const double l = r.l[r.at_sbt(s, 0, t)];
            const double pe1 = r.PE[r.at_sit(s, 1, t)];
            CHECK(std::abs(p - inst.net.branches[0].r * l + pe1 / S) <= 1e-8);
            CHECK(r.v[r.at_sbus(s, 0, t)] == doctest::Approx(inst.net.v_ref * inst.net.v_ref).epsilon(1e-9));
        }
    }
}
