#pragma once

// Economic indices, the P2P-invariance verification harness and sweep drivers.

#include "dso/dispatch.hpp"
#include "dso/p2p.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace dso {

struct EconomicIndices {
    double total_surplus = 0.0;
    double net_surplus_p2p = 0.0;
    double incremental_improvement = 0.0;
    double p2p_utility = 0.0;  // utility buyers draw from their P2P purchases
};

/// Sum over buyers (P^B < 0) and periods of -alpha_u |P^B|^2 + beta_u |P^B|.
/// The plan is scenario-independent, so the expectation is the value itself.
double p2p_utility(const Instance& inst, const NetTradePlan& plan);

/// Market revenue plus P2P utility minus expected generation and degradation cost.
double net_surplus_p2p(const DispatchResult& result, const Instance& inst, const NetTradePlan& plan);

/// Indices of a solved plan; zero_result is the solution without P2P trading.
EconomicIndices indices(const DispatchResult& result, const NetTradePlan& plan, const DispatchResult& zero_result,
                        const Instance& inst);

// ---------------------------------------------------------------------------
// Invariance under P2P trading

enum class Verdict { InvarianceHolds, Violated };

struct TheoremOptions {
    double objective_tol = 1e-5;    // relative: |a - b| <= tol (1 + |b|)
    double energy_tol = 1e-5;       // MW
    double feasibility_tol = 1e-6;  // constructed point, per row
    double stationarity_tol = 1e-6;
    double complementarity_tol = 1e-7;
    SolveOptions solver;
};

struct TheoremReport {
    SolveStatus base_status = SolveStatus::NumericalFailure;
    SolveStatus p2p_status = SolveStatus::NumericalFailure;
    double base_objective = 0.0;  // total surplus without trading
    double p2p_objective = 0.0;   // total surplus with the plan, solved independently
    bool constructed_feasible = false;
    double constructed_infeasibility = 0.0;
    double constructed_objective = 0.0;  // total surplus of the shifted base solution
    double objective_residual = 0.0;     // |constructed - solved| / (1 + |solved|)
    double e_shift_residual = 0.0;       // max_t |E_t(plan) - (E_t(0) - sum_i P^B)|
    double dispatch_residual = 0.0;      // max |constructed - base| over non-market variables
    double constructed_stationarity = 0.0;  // KKT audit of the shifted point with the base duals
    double constructed_complementarity = 0.0;
    double p2p_stationarity = 0.0;          // KKT audit of the independent solve with the plan
    double p2p_complementarity = 0.0;
    bool power_only = false;                // every contract is a power contract
    double surplus_invariance_residual = 0.0;
    double e_invariance_residual = 0.0;     // max_t |E_t(plan) - E_t(0)|
    double max_abs_imbalance = 0.0;
    Verdict verdict = Verdict::Violated;
    std::vector<std::string> details;       // reasons when violated
};

std::string_view verdict_name(Verdict v);

/// Solves without trading (or reuses `base`), shifts P^E and E by the plan,
/// checks the shifted point against the P2P program, solves the P2P program
/// independently and compares. `power_only` selects the stricter checks.
TheoremReport verify_invariance(const Instance& inst, const NetTradePlan& plan, bool power_only,
                              const TheoremOptions& opts = {}, const SolvedCase* base = nullptr);

/// Base primal with P^E -= P^B and E -= imbalance; every other column copied.
Eigen::VectorXd shifted_solution(const P1Problem& base_problem, const Eigen::VectorXd& base_primal,
                                 const NetTradePlan& plan);

// ---------------------------------------------------------------------------
// Random books for property checks

/// Power contracts between random distinct pairs; per-period quantity uniform
/// in [0, max_mw], rounded to kW.
std::vector<Contract> random_power_book(std::uint64_t seed, int n_prosumers, int horizon, int n_contracts,
                                       double max_mw);

/// Energy contracts over the whole horizon between random pairs, scaled down
/// so the net imbalance keeps the shifted market position inside `margin`
/// times the exchange headroom of the base solution at every period.
std::vector<Contract> random_energy_book(std::uint64_t seed, const Instance& inst, const DispatchResult& base,
                                         int n_contracts, double max_mw, double margin = 0.9);

// ---------------------------------------------------------------------------
// Sweeps

enum class SweepKind { Power, Energy, CommonPart };

std::string_view sweep_kind_name(SweepKind k);

struct SweepPoint {
    double ratio = 0.0;
    Contract contract;
    SolveStatus status = SolveStatus::NumericalFailure;
    std::string error;                    // solver or assembly failure, empty otherwise
    EconomicIndices idx;
    std::vector<double> E, R, imbalance;  // (t)
    std::vector<double> expected_pe;      // (i, t), omega-weighted
    std::vector<double> pb;               // (i, t)
    double relaxation_gap = 0.0;
    double complementarity = 0.0;
    double kkt_stationarity = 0.0;
    double kkt_complementarity = 0.0;
    int iterations = 0;
    double runtime_s = 0.0;
};

/// One solve per contract, spread over `threads` workers (0: one per core).
/// Failures are recorded on the point and the sweep continues. `ratios[k]`
/// labels `contracts[k]` and the output keeps the input order.
std::vector<SweepPoint> run_sweep(const Instance& inst, const std::vector<Contract>& contracts,
                                  const std::vector<double>& ratios, const SolveOptions& opts,
                                  const DispatchResult& zero_result, int threads = 0);

}  // namespace dso
