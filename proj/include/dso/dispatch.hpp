#pragma once

// Solved dispatch in model terms, surplus recomputation and relaxation
// diagnostics.

#include "dso/model.hpp"
#include "dso/solver.hpp"

#include <vector>

namespace dso {

struct SurplusBreakdown {
    double energy_revenue = 0.0;   // sum_t pi^E E_t
    double reserve_revenue = 0.0;  // sum_t pi^R R_t
    double utility = 0.0;          // expected sum of U over (i, t)
    double generation_cost = 0.0;  // expected
    double degradation_cost = 0.0; // expected
    double total() const { return energy_revenue + reserve_revenue + utility - generation_cost - degradation_cost; }
};

struct DispatchResult {
    SolveStatus status = SolveStatus::NumericalFailure;
    ModelDims dims;
    std::vector<double> E, R;                               // (t)
    std::vector<double> Pg, Pr, Pc, Pdis, PD, PE, QS, Deg;  // (s, i, t)
    std::vector<double> p_flow, q_flow, l;                  // (s, branch, t), pu
    std::vector<double> v;                                  // (s, bus, t), pu
    std::vector<double> p_sub, q_sub;                       // (s, t), pu
    double solver_objective = 0.0;                          // minimized value: -total surplus
    SurplusBreakdown surplus;                               // recomputed from the primal values

    std::size_t at_sit(int s, int i, int t) const {
        return (static_cast<std::size_t>(s) * dims.n_prosumers + i) * dims.horizon + t;
    }
    std::size_t at_sbt(int s, int k, int t) const {
        return (static_cast<std::size_t>(s) * dims.n_branches + k) * dims.horizon + t;
    }
    std::size_t at_sbus(int s, int b, int t) const {
        return (static_cast<std::size_t>(s) * dims.n_buses + b) * dims.horizon + t;
    }
    std::size_t at_st(int s, int t) const { return static_cast<std::size_t>(s) * dims.horizon + t; }
};

/// Reads every model variable out of a solver report. For non-optimal reports
/// the vectors are left empty and only the status is set.
DispatchResult extract_dispatch(const Instance& inst, const P1Problem& problem, const SolveReport& report);

/// Total surplus recomputed from the dispatch alone, independently of the
/// solver's objective. Degradation uses |P^dis - P^c| rather than the epigraph.
SurplusBreakdown objective_value(const DispatchResult& result, const Instance& inst);

struct GapLocation {
    double value = 0.0;
    int s = -1;
    int idx = -1;  // branch or prosumer
    int t = -1;
};

/// max over (s, branch, t) of l - (p^2 + q^2) / v at the receiving-end voltage.
GapLocation relaxation_gap(const DispatchResult& result, const Network& net);

/// max over (s, i, t) of P^c * P^dis.
GapLocation complementarity_gap(const DispatchResult& result);

/// max over (s, i, t) of d - |P^dis - P^c|.
GapLocation degradation_slack(const DispatchResult& result);

/// Convenience wrapper: assemble, solve, extract.
struct SolvedCase {
    P1Problem problem;
    SolveReport report;
    DispatchResult result;
};

SolvedCase solve_case(const Instance& inst, const NetTradePlan& plan, const SolveOptions& opts = {});

}  // namespace dso
