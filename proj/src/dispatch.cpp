#include "dso/dispatch.hpp"

#include <cmath>
#include <limits>

namespace dso {

DispatchResult extract_dispatch(const Instance& inst, const P1Problem& problem, const SolveReport& report) {
    DispatchResult r;
    r.status = report.status;
    r.dims = problem.vars.dims();
    if (report.status != SolveStatus::Optimal) return r;
    const VariableMap& vars = problem.vars;
    const ModelDims& d = r.dims;
    const Eigen::VectorXd& x = report.primal;

    for (int t = 0; t < d.horizon; ++t) {
        r.E.push_back(x[vars.at(Symbol::E, t)]);
        r.R.push_back(x[vars.at(Symbol::R, t)]);
    }
    auto fill = [&](std::vector<double>& out, Symbol sym, int extent) {
        out.resize(static_cast<std::size_t>(d.n_scenarios) * extent * d.horizon);
        std::size_t k = 0;
        for (int s = 0; s < d.n_scenarios; ++s) {
            for (int e = 0; e < extent; ++e) {
                for (int t = 0; t < d.horizon; ++t) out[k++] = x[vars.at(sym, s, e, t)];
            }
        }
    };
    fill(r.Pg, Symbol::Pg, d.n_prosumers);
    fill(r.Pr, Symbol::Pr, d.n_prosumers);
    fill(r.Pc, Symbol::Pc, d.n_prosumers);
    fill(r.Pdis, Symbol::Pdis, d.n_prosumers);
    fill(r.PD, Symbol::PD, d.n_prosumers);
    fill(r.PE, Symbol::PE, d.n_prosumers);
    fill(r.QS, Symbol::QS, d.n_prosumers);
    fill(r.Deg, Symbol::Deg, d.n_prosumers);
    fill(r.p_flow, Symbol::Pf, d.n_branches);
    fill(r.q_flow, Symbol::Qf, d.n_branches);
    fill(r.l, Symbol::L, d.n_branches);
    fill(r.v, Symbol::V, d.n_buses);
    for (int s = 0; s < d.n_scenarios; ++s) {
        for (int t = 0; t < d.horizon; ++t) {
            r.p_sub.push_back(x[vars.at_st(Symbol::Psub, s, t)]);
            r.q_sub.push_back(x[vars.at_st(Symbol::Qsub, s, t)]);
        }
    }
    r.solver_objective = report.objective;
    r.surplus = objective_value(r, inst);
    return r;
}

SurplusBreakdown objective_value(const DispatchResult& r, const Instance& inst) {
    SurplusBreakdown out;
    if (r.E.empty()) return out;
    const ModelDims& d = r.dims;
    for (int t = 0; t < d.horizon; ++t) {
        out.energy_revenue += inst.prices.energy[t] * r.E[t];
        out.reserve_revenue += inst.prices.reserve[t] * r.R[t];
    }
    for (int s = 0; s < d.n_scenarios; ++s) {
        const double w = inst.scenarios.omega[s];
        for (int i = 0; i < d.n_prosumers; ++i) {
            const ProsumerParams& p = inst.prosumers[i];
            for (int t = 0; t < d.horizon; ++t) {
                const std::size_t k = r.at_sit(s, i, t);
                out.utility += w * utility(p, inst.scenarios.load_at(s, i, t), r.PD[k]);
                out.generation_cost += w * generation_cost(p, r.Pg[k]);
                out.degradation_cost += w * degradation_cost(p, r.Pc[k], r.Pdis[k]);
            }
        }
    }
    return out;
}

GapLocation relaxation_gap(const DispatchResult& r, const Network& net) {
    GapLocation g;
    if (r.l.empty()) return g;
    g.value = -std::numeric_limits<double>::infinity();
    for (int s = 0; s < r.dims.n_scenarios; ++s) {
        for (int k = 0; k < r.dims.n_branches; ++k) {
            const int dn = net.branches[k].to;
            for (int t = 0; t < r.dims.horizon; ++t) {
                const std::size_t j = r.at_sbt(s, k, t);
                const double p = r.p_flow[j], q = r.q_flow[j];
                const double gap = r.l[j] - (p * p + q * q) / r.v[r.at_sbus(s, dn, t)];
                if (gap > g.value) g = {gap, s, k, t};
            }
        }
    }
    if (g.s < 0) g.value = 0.0;
    return g;
}

namespace {

template <class F>
GapLocation max_over_sit(const DispatchResult& r, F&& f) {
    GapLocation g;
    if (r.Pc.empty()) return g;
    g.value = -std::numeric_limits<double>::infinity();
    for (int s = 0; s < r.dims.n_scenarios; ++s) {
        for (int i = 0; i < r.dims.n_prosumers; ++i) {
            for (int t = 0; t < r.dims.horizon; ++t) {
                const double v = f(r.at_sit(s, i, t));
                if (v > g.value) g = {v, s, i, t};
            }
        }
    }
    if (g.s < 0) g.value = 0.0;
    return g;
}

}  // namespace

GapLocation complementarity_gap(const DispatchResult& r) {
    return max_over_sit(r, [&](std::size_t k) { return r.Pc[k] * r.Pdis[k]; });
}

GapLocation degradation_slack(const DispatchResult& r) {
    return max_over_sit(r, [&](std::size_t k) { return r.Deg[k] - std::abs(r.Pdis[k] - r.Pc[k]); });
}

SolvedCase solve_case(const Instance& inst, const NetTradePlan& plan, const SolveOptions& opts) {
    SolvedCase out;
    out.problem = assemble_p1(inst, plan);
    out.report = solve(out.problem.prog, opts);
    out.result = extract_dispatch(inst, out.problem, out.report);
    return out;
}

}  // namespace dso
