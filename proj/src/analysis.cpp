#include "dso/analysis.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <random>
#include <thread>

namespace dso {

double p2p_utility(const Instance& inst, const NetTradePlan& plan) {
    double u = 0.0;
    for (int i = 0; i < plan.n_prosumers; ++i) {
        const ProsumerParams& p = inst.prosumers.at(i);
        for (int t = 0; t < plan.horizon; ++t) {
            const double pb = plan.pb_mw(i, t);
            if (pb < 0.0) u += -p.alpha_u * pb * pb + p.beta_u * (-pb);
        }
    }
    return u;
}

double net_surplus_p2p(const DispatchResult& result, const Instance& inst, const NetTradePlan& plan) {
    const SurplusBreakdown& b = result.surplus;
    return b.energy_revenue + b.reserve_revenue + p2p_utility(inst, plan) - b.generation_cost - b.degradation_cost;
}

EconomicIndices indices(const DispatchResult& result, const NetTradePlan& plan, const DispatchResult& zero_result,
                        const Instance& inst) {
    EconomicIndices out;
    out.total_surplus = result.surplus.total();
    out.p2p_utility = p2p_utility(inst, plan);
    out.net_surplus_p2p = net_surplus_p2p(result, inst, plan);
    const NetTradePlan none(plan.n_prosumers, plan.horizon);
    out.incremental_improvement = out.net_surplus_p2p - net_surplus_p2p(zero_result, inst, none);
    return out;
}

std::string_view verdict_name(Verdict v) {
    return v == Verdict::InvarianceHolds ? "InvarianceHolds" : "Violated";
}

Eigen::VectorXd shifted_solution(const P1Problem& base_problem, const Eigen::VectorXd& base_primal,
                                 const NetTradePlan& plan) {
    const VariableMap& vars = base_problem.vars;
    const ModelDims& d = vars.dims();
    Eigen::VectorXd x = base_primal;
    for (int t = 0; t < d.horizon; ++t) {
        x[vars.at(Symbol::E, t)] -= plan.imbalance_mw(t);
        for (int s = 0; s < d.n_scenarios; ++s) {
            for (int i = 0; i < d.n_prosumers; ++i) x[vars.at(Symbol::PE, s, i, t)] -= plan.pb_mw(i, t);
        }
    }
    return x;
}

TheoremReport verify_invariance(const Instance& inst, const NetTradePlan& plan, bool power_only,
                              const TheoremOptions& opts, const SolvedCase* base_in) {
    TheoremReport rep;
    rep.power_only = power_only;
    const int T = inst.horizon();
    for (int t = 0; t < T; ++t) rep.max_abs_imbalance = std::max(rep.max_abs_imbalance, std::abs(plan.imbalance_mw(t)));
    auto fail = [&](std::string why) { rep.details.push_back(std::move(why)); };

    // (a) no trading
    SolvedCase base_local;
    if (!base_in) {
        base_local = solve_case(inst, NetTradePlan(plan.n_prosumers, plan.horizon), opts.solver);
        base_in = &base_local;
    }
    const SolvedCase& base = *base_in;
    rep.base_status = base.report.status;
    if (base.report.status != SolveStatus::Optimal) {
        fail("solve without trading ended " + std::string(status_name(base.report.status)));
        return rep;
    }
    rep.base_objective = base.result.surplus.total();

    // (b) shifted point, (c) checked against the P2P program
    const P1Problem p2p_problem = assemble_p1(inst, plan);
    const Eigen::VectorXd x_star = shifted_solution(base.problem, base.report.primal, plan);
    const FeasibilityCheck fc = check_feasibility(p2p_problem.prog, x_star);
    rep.constructed_infeasibility = fc.worst();
    rep.constructed_feasible = rep.constructed_infeasibility <= opts.feasibility_tol;
    rep.constructed_objective = -p2p_problem.prog.objective(x_star);
    if (base.report.has_duals) {
        const KktAudit a = audit_kkt(p2p_problem.prog, x_star, base.report.duals);
        rep.constructed_stationarity = a.stationarity;
        rep.constructed_complementarity = a.max_complementarity;
    }
    {
        const VariableMap& vars = base.problem.vars;
        for (int col = 0; col < vars.size(); ++col) {
            const Symbol sym = vars.key(col).sym;
            if (sym == Symbol::E || sym == Symbol::PE) continue;
            rep.dispatch_residual = std::max(rep.dispatch_residual, std::abs(x_star[col] - base.report.primal[col]));
        }
    }

    // (d) independent solve with the plan
    SolveReport p2p_report = solve(p2p_problem.prog, opts.solver);
    rep.p2p_status = p2p_report.status;
    if (p2p_report.status != SolveStatus::Optimal) {
        fail("solve with the plan ended " + std::string(status_name(p2p_report.status)));
        return rep;
    }
    {
        const KktAudit a = audit_kkt(p2p_problem.prog, p2p_report.primal, p2p_report.duals);
        rep.p2p_stationarity = a.stationarity;
        rep.p2p_complementarity = a.max_complementarity;
    }
    const DispatchResult p2p = extract_dispatch(inst, p2p_problem, p2p_report);
    rep.p2p_objective = p2p.surplus.total();
    rep.objective_residual = std::abs(rep.constructed_objective - rep.p2p_objective) / (1.0 + std::abs(rep.p2p_objective));
    for (int t = 0; t < T; ++t) {
        rep.e_shift_residual =
            std::max(rep.e_shift_residual, std::abs(p2p.E[t] - (base.result.E[t] - plan.imbalance_mw(t))));
        rep.e_invariance_residual = std::max(rep.e_invariance_residual, std::abs(p2p.E[t] - base.result.E[t]));
    }
    rep.surplus_invariance_residual =
        std::abs(rep.p2p_objective - rep.base_objective) / (1.0 + std::abs(rep.base_objective));

    if (!rep.constructed_feasible) fail("shifted solution violates a constraint by " + std::to_string(rep.constructed_infeasibility));
    if (rep.objective_residual > opts.objective_tol) fail("shifted solution objective differs from the solved optimum");
    if (rep.e_shift_residual > opts.energy_tol) fail("market energy does not shift by the imbalance");
    if (rep.dispatch_residual > opts.energy_tol) fail("shifted solution changed the internal dispatch");
    if (base.report.has_duals) {
        if (rep.constructed_stationarity > opts.stationarity_tol) fail("base multipliers are not stationary at the shifted point");
        if (rep.constructed_complementarity > opts.complementarity_tol) fail("base multipliers lose complementarity at the shifted point");
    }
    if (power_only) {
        if (rep.e_invariance_residual > opts.energy_tol) fail("market energy changed under power contracts");
        if (rep.surplus_invariance_residual > opts.objective_tol) fail("total surplus changed under power contracts");
    }
    rep.verdict = rep.details.empty() ? Verdict::InvarianceHolds : Verdict::Violated;
    return rep;
}

// ---------------------------------------------------------------------------

namespace {

std::pair<int, int> random_pair(std::mt19937_64& rng, int n_prosumers) {
    std::uniform_int_distribution<int> pick(0, n_prosumers - 1);
    const int seller = pick(rng);
    int buyer = pick(rng);
    while (buyer == seller) buyer = pick(rng);
    return {seller, buyer};
}

double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

}  // namespace

std::vector<Contract> random_power_book(std::uint64_t seed, int n_prosumers, int horizon, int n_contracts,
                                       double max_mw) {
    if (n_prosumers < 2) throw ContractError("a contract needs two prosumers");
    std::mt19937_64 rng(seed);
    std::vector<Contract> book;
    for (int j = 0; j < n_contracts; ++j) {
        const auto [seller, buyer] = random_pair(rng, n_prosumers);
        std::vector<double> q(horizon);
        for (double& v : q) v = max_mw * uniform01(rng);
        book.push_back(make_contract(j + 1, seller, buyer, q, q));
    }
    return book;
}

std::vector<Contract> random_energy_book(std::uint64_t seed, const Instance& inst, const DispatchResult& base,
                                         int n_contracts, double max_mw, double margin) {
    const int n_p = inst.n_prosumers();
    const int T = inst.horizon();
    if (n_p < 2) throw ContractError("a contract needs two prosumers");
    if (base.E.empty()) throw ContractError("energy book needs a solved base case");
    std::mt19937_64 rng(seed);

    struct Raw {
        int seller, buyer;
        std::vector<double> sell, buy;
    };
    std::vector<Raw> raw;
    std::vector<double> imb(T, 0.0);
    for (int j = 0; j < n_contracts; ++j) {
        const auto [seller, buyer] = random_pair(rng, n_p);
        Raw r{seller, buyer, std::vector<double>(T), std::vector<double>(T)};
        double ts = 0.0, tb = 0.0;
        for (int t = 0; t < T; ++t) {
            r.sell[t] = max_mw * uniform01(rng);
            r.buy[t] = max_mw * uniform01(rng);
            ts += r.sell[t];
            tb += r.buy[t];
        }
        if (ts > 0.0) {
            for (double& v : r.sell) v *= tb / ts;
        }
        for (int t = 0; t < T; ++t) imb[t] += r.sell[t] - r.buy[t];
        raw.push_back(std::move(r));
    }

    // imbalance must stay inside [-m (E_max - E - R), m (E_max + E)] at every t
    const double e_max = inst.net.e_ex_max;
    double scale = 1.0;
    for (int t = 0; t < T; ++t) {
        const double up = margin * std::max(0.0, e_max - base.E[t] - base.R[t]);
        const double dn = margin * std::max(0.0, e_max + base.E[t]);
        if (imb[t] > 0.0) scale = std::min(scale, dn / imb[t]);
        if (imb[t] < 0.0) scale = std::min(scale, up / -imb[t]);
    }

    std::vector<Contract> book;
    for (int j = 0; j < n_contracts; ++j) {
        Contract c;
        c.id = j + 1;
        c.seller = raw[j].seller;
        c.buyer = raw[j].buyer;
        Kilowatts sb = 0, ss = 0;
        for (int t = 0; t < T; ++t) {
            c.q_buy.push_back(to_kw(scale * raw[j].buy[t]));
            c.q_sell.push_back(to_kw(scale * raw[j].sell[t]));
            sb += c.q_buy.back();
            ss += c.q_sell.back();
        }
        // rounding residual goes to the seller's largest period
        auto it = std::max_element(c.q_sell.begin(), c.q_sell.end());
        *it += sb - ss;
        if (*it < 0) *it = 0;
        book.push_back(std::move(c));
    }
    return book;
}

// ---------------------------------------------------------------------------

std::string_view sweep_kind_name(SweepKind k) {
    switch (k) {
        case SweepKind::Power: return "power";
        case SweepKind::Energy: return "energy";
        case SweepKind::CommonPart: return "common-part";
    }
    return "?";
}

std::vector<SweepPoint> run_sweep(const Instance& inst, const std::vector<Contract>& contracts,
                                  const std::vector<double>& ratios, const SolveOptions& opts,
                                  const DispatchResult& zero_result, int threads) {
    if (contracts.size() != ratios.size()) throw ContractError("one ratio label per sweep contract is required");
    const int n_p = inst.n_prosumers();
    const int T = inst.horizon();
    std::vector<SweepPoint> out(contracts.size());

    auto solve_point = [&](std::size_t k) {
        SweepPoint& pt = out[k];
        pt.ratio = ratios[k];
        pt.contract = contracts[k];
        try {
            const NetTradePlan plan = net_trade(std::span(&contracts[k], 1), n_p, T);
            for (int t = 0; t < T; ++t) pt.imbalance.push_back(plan.imbalance_mw(t));
            for (int i = 0; i < n_p; ++i) {
                for (int t = 0; t < T; ++t) pt.pb.push_back(plan.pb_mw(i, t));
            }
            const SolvedCase sc = solve_case(inst, plan, opts);
            pt.status = sc.report.status;
            pt.iterations = sc.report.iterations;
            pt.runtime_s = sc.report.runtime_s;
            if (sc.report.status == SolveStatus::Optimal) {
                const DispatchResult& r = sc.result;
                pt.idx = indices(r, plan, zero_result, inst);
                pt.E = r.E;
                pt.R = r.R;
                pt.expected_pe.assign(static_cast<std::size_t>(n_p) * T, 0.0);
                for (int s = 0; s < r.dims.n_scenarios; ++s) {
                    for (int i = 0; i < n_p; ++i) {
                        for (int t = 0; t < T; ++t) {
                            pt.expected_pe[i * T + t] += inst.scenarios.omega[s] * r.PE[r.at_sit(s, i, t)];
                        }
                    }
                }
                pt.relaxation_gap = relaxation_gap(r, inst.net).value;
                pt.complementarity = complementarity_gap(r).value;
                const KktAudit audit = audit_kkt(sc.problem.prog, sc.report.primal, sc.report.duals);
                pt.kkt_stationarity = audit.stationarity;
                pt.kkt_complementarity = audit.max_complementarity;
            } else {
                pt.error = "solver status " + std::string(status_name(sc.report.status));
            }
        } catch (const std::exception& e) {
            pt.error = e.what();
        }
        if (!pt.error.empty()) spdlog::warn("sweep point {}: {}", pt.ratio, pt.error);
    };

    int n_threads = threads > 0 ? threads : static_cast<int>(std::thread::hardware_concurrency());
    n_threads = std::clamp(n_threads, 1, std::max(1, static_cast<int>(contracts.size())));
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t k = next++; k < contracts.size(); k = next++) solve_point(k);
    };
    if (n_threads == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (int w = 0; w < n_threads; ++w) pool.emplace_back(worker);
    }
    return out;
}

}  // namespace dso
