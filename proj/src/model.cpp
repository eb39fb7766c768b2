#include "dso/model.hpp"

#include <cmath>
#include <string>

namespace dso {

ModelDims Instance::dims() const {
    ModelDims d;
    d.n_scenarios = scenarios.n_scenarios;
    d.n_prosumers = n_prosumers();
    d.n_buses = net.n_buses();
    d.n_branches = net.n_branches();
    d.horizon = scenarios.horizon;
    return d;
}

void check_instance(const Instance& inst) {
    const int T = inst.horizon();
    const int n_p = inst.n_prosumers();
    if (T < 1) throw AssemblyError("horizon must be at least one period");
    if (inst.scenarios.n_prosumers != n_p) {
        throw AssemblyError("scenario set covers " + std::to_string(inst.scenarios.n_prosumers) +
                            " prosumers, case has " + std::to_string(n_p));
    }
    if (static_cast<int>(inst.prices.energy.size()) != T || static_cast<int>(inst.prices.reserve.size()) != T) {
        throw AssemblyError("price vectors must have one entry per period");
    }
    for (int i = 0; i < n_p; ++i) {
        const ProsumerParams& p = inst.prosumers[i];
        if (p.i != i) throw AssemblyError("prosumer " + std::to_string(i) + " carries index " + std::to_string(p.i));
        if (inst.net.bus_of(i) < 0) throw AssemblyError("prosumer " + std::to_string(i) + " is not placed on a bus");
        if (!p.pd_flex_max.empty() && static_cast<int>(p.pd_flex_max.size()) != T) {
            throw AssemblyError("prosumer " + std::to_string(i) + " curtailment caps do not match the horizon");
        }
    }
    for (const Bus& b : inst.net.buses) {
        if (b.prosumer && (*b.prosumer < 0 || *b.prosumer >= n_p)) {
            throw AssemblyError("bus " + std::to_string(b.id) + " references missing prosumer " +
                                std::to_string(*b.prosumer));
        }
    }
}

std::vector<double> reactive_demand(const Instance& inst, int t) {
    std::vector<double> qd(inst.net.n_buses(), 0.0);
    for (int b = 0; b < inst.net.n_buses(); ++b) {
        const Bus& bus = inst.net.buses[b];
        if (!bus.prosumer || bus.reactive_pf >= 1.0) continue;
        double mean = 0.0;
        for (int s = 0; s < inst.scenarios.n_scenarios; ++s) {
            mean += inst.scenarios.omega[s] * inst.scenarios.load_at(s, *bus.prosumer, t);
        }
        qd[b] = mean * std::tan(std::acos(bus.reactive_pf));
    }
    return qd;
}

P1Problem assemble_p1(const Instance& inst, const NetTradePlan& plan) {
    check_instance(inst);
    const int T = inst.horizon();
    const int n_s = inst.scenarios.n_scenarios;
    const int n_p = inst.n_prosumers();
    if (plan.n_prosumers != n_p || plan.horizon != T) throw AssemblyError("trade plan dimensions do not match the case");
    const Network& net = inst.net;
    const double S = net.s_base;

    P1Problem out;
    out.vars = VariableMap(inst.dims());
    const VariableMap& vars = out.vars;
    ProgramBuilder pb(vars.size());

    std::vector<std::vector<double>> qd(T);
    for (int t = 0; t < T; ++t) qd[t] = reactive_demand(inst, t);

    for (int s = 0; s < n_s; ++s) {
        const double omega = inst.scenarios.omega[s];
        for (int t = 0; t < T; ++t) {
            for (const ProsumerParams& p : inst.prosumers) {
                const double load = inst.scenarios.load_at(s, p.i, t);
                const double pv = inst.scenarios.pv_at(s, p.i, t);
                pb.add(thermal_block(p, s, t, vars));
                pb.add(storage_block(p, s, t, vars));
                pb.add(flexdemand_block(p, s, t, vars));
                pb.add(balance_block(p, plan.pb_mw(p.i, t), pv, load, s, t, vars));
                add_prosumer_objective(pb, p, s, t, omega, load, vars);
            }

            NodalInputs nodal;
            nodal.pb_mw.assign(net.n_buses(), 0.0);
            nodal.qd_mvar = qd[t];
            for (int b = 0; b < net.n_buses(); ++b) {
                if (net.buses[b].prosumer) nodal.pb_mw[b] = plan.pb_mw(*net.buses[b].prosumer, t);
            }
            pb.add(build_distflow_block(net, nodal, s, t, vars));

            // market coupling: E_t = sum_i P^E - losses, R_t = sum_i P^R, in every scenario
            ConstraintBlock market;
            std::vector<Term> energy{{vars.at(Symbol::E, t), 1.0}};
            std::vector<Term> reserve{{vars.at(Symbol::R, t), 1.0}};
            for (int i = 0; i < n_p; ++i) {
                energy.push_back({vars.at(Symbol::PE, s, i, t), -1.0});
                reserve.push_back({vars.at(Symbol::Pr, s, i, t), -1.0});
            }
            for (int k = 0; k < net.n_branches(); ++k) {
                if (net.branches[k].r != 0.0) energy.push_back({vars.at(Symbol::L, s, k, t), S * net.branches[k].r});
            }
            market.eq({RowTag::MarketEnergy, s, 0, t}, std::move(energy), 0.0);
            market.eq({RowTag::MarketReserve, s, 0, t}, std::move(reserve), 0.0);
            pb.add(std::move(market));
        }
    }

    ConstraintBlock exchange;
    for (int t = 0; t < T; ++t) {
        const int e = vars.at(Symbol::E, t);
        const int r = vars.at(Symbol::R, t);
        exchange.le({RowTag::ExchangeUpper, 0, 0, t}, {{e, 1.0}}, net.e_ex_max);
        exchange.le({RowTag::ExchangeLower, 0, 0, t}, {{e, -1.0}}, net.e_ex_max);
        exchange.le({RowTag::ExchangeReserveUpper, 0, 0, t}, {{e, 1.0}, {r, 1.0}}, net.e_ex_max);
        exchange.le({RowTag::ExchangeReserveLower, 0, 0, t}, {{e, -1.0}, {r, -1.0}}, net.e_ex_max);
        pb.add_linear(e, -inst.prices.energy[t]);
        pb.add_linear(r, -inst.prices.reserve[t]);
    }
    pb.add(std::move(exchange));

    out.prog = std::move(pb).seal();
    return out;
}

}  // namespace dso
