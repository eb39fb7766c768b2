#include "dso/case.hpp"

#include <cmath>

namespace dso {

namespace {

double bump(double t, double centre, double width) {
    const double z = (t - centre) / width;
    return std::exp(-z * z);
}

// Evening-peaked energy price with a smaller morning shoulder. A slow ramp
// keeps every hour distinct so that no two periods are interchangeable.
std::vector<double> energy_prices(int T) {
    std::vector<double> out(T);
    for (int t = 0; t < T; ++t) {
        out[t] = 28.0 + 9.0 * bump(t, 9.0, 2.5) + 30.0 * bump(t, 19.0, 2.5) - 6.0 * bump(t, 3.0, 2.5) + 0.31 * t;
    }
    return out;
}

std::vector<double> reserve_prices(const std::vector<double>& energy) {
    std::vector<double> out;
    for (double p : energy) out.push_back(0.05 * p);
    return out;
}

// Midday PV, exactly zero outside hours 6..18.
double pv_shape(int t) {
    if (t < 6 || t > 18) return 0.0;
    return std::sin((t - 5) * 3.14159265358979323846 / 14.0);
}

}  // namespace

CaseFile make_two_bus_case() {
    CaseFile c;
    const int T = 24;
    c.name = "two_bus";
    c.description =
        "Two prosumers at the ends of one branch. DER ratings follow the published parameter table; price, PV and "
        "load series are synthetic stand-ins shaped like the published figures (evening price peak, midday PV).";
    c.horizon = T;

    Network& net = c.network;
    net.v_base = 11.0;
    net.s_base = 10.0;
    net.v_ref = 1.0;
    net.e_ex_max = 12.0;
    Bus b0;
    b0.id = 0;
    b0.is_substation = true;
    b0.prosumer = 0;
    Bus b1;
    b1.id = 1;
    b1.prosumer = 1;
    b1.reactive_pf = 0.95;
    net.buses = {b0, b1};
    Branch br;
    br.from = 0;
    br.to = 1;
    br.r = 0.01;
    br.x = 0.02;
    br.smax = 12.0;
    net.branches = {br};

    // seller: thermal unit, PV, lossy storage, no curtailable load
    ProsumerParams p0;
    p0.i = 0;
    p0.pg_min = 0.25;
    p0.pg_max = 5.0;
    p0.msr = 0.05;
    p0.ru = 1.5;
    p0.rd = 1.5;
    p0.pg_init = 2.5;
    p0.pd_flex_max.assign(T, 0.0);
    p0.ps_max = 0.25;
    p0.eta = 0.8;
    p0.q_min = 0.0;
    p0.q_cap = 1.25;
    p0.q_init = 0.0;
    p0.alpha_g = 4.0;
    p0.beta_g = 18.0;
    p0.alpha_s = 2.0;
    p0.beta_s = 0.5;

    // buyer: load with a curtailable share and storage, no generation
    ProsumerParams p1;
    p1.i = 1;
    p1.pd_flex_max.assign(T, 0.25);
    p1.ps_max = 0.25;
    p1.eta = 0.9;
    p1.q_min = 0.0;
    p1.q_cap = 1.25;
    p1.q_init = 0.0;
    p1.alpha_s = 2.0;
    p1.beta_s = 0.5;
    p1.alpha_u = 10.0;
    p1.beta_u = 100.0;
    c.prosumers = {p0, p1};

    c.prices.energy = energy_prices(T);
    c.prices.reserve = reserve_prices(c.prices.energy);

    c.forecast = Forecast(2, T);
    for (int t = 0; t < T; ++t) {
        c.forecast.pv_at(0, t) = 3.0 * pv_shape(t);
        c.forecast.load_at(1, t) = 2.2 + 0.8 * bump(t, 19.0, 3.0) + 0.3 * bump(t, 8.0, 2.0);
    }
    c.sigma_pv = 0.8;
    c.sigma_d = 0.3;

    // sweep bases: flat purchase by the buyer; the energy variant is delivered
    // by the seller during hours 8..19 only
    std::vector<double> flat(T, 1.0), day(T, 0.0);
    for (int t = 8; t < 20; ++t) day[t] = 2.0;
    c.sweep.power = make_contract(1, 0, 1, flat, flat);
    c.sweep.energy = make_contract(2, 0, 1, day, flat);
    CommonPartBase cp;
    cp.seller = 0;
    cp.buyer = 1;
    cp.seller_profile.assign(T, 0.0);
    cp.buyer_profile.assign(T, 0.0);
    for (int t = 0; t < T; ++t) {
        if (t >= 8 && t < 20) {
            cp.seller_profile[t] = 1.5 * (0.6 + 0.4 * pv_shape(t));
        } else {
            cp.buyer_profile[t] = 1.2;
        }
    }
    c.sweep.common_part = cp;

    c.options.n_scenarios = 10;
    c.options.seed = 35;
    c.options.theorem_tol = 1e-5;
    return c;
}

CaseFile make_ukgds95_case() {
    CaseFile c;
    const int T = 24;
    const int nb = 95;
    c.name = "ukgds95";
    c.description =
        "95-bus radial 11 kV feeder with 18 prosumers. Prosumer placement, DG ranges, PV owners, demand level, "
        "curtailment windows and the 55 MW exchange limit follow the published case description; impedances, feeder layout and "
        "all time series are synthetic.";
    c.horizon = T;

    Network& net = c.network;
    net.v_base = 11.0;
    net.s_base = 10.0;
    net.v_ref = 1.0;
    net.e_ex_max = 55.0;
    for (int b = 0; b < nb; ++b) {
        Bus bus;
        bus.id = b;
        bus.vmin = 0.94;
        bus.vmax = 1.06;
        bus.is_substation = b == 0;
        bus.reactive_pf = 0.97;
        net.buses.push_back(bus);
    }
    // node n (1-based) is bus n - 1. Four main feeders leave the substation;
    // each is a trunk with short laterals every fourth node.
    const int feeder_start[4] = {1, 25, 49, 73};
    const int feeder_end[4] = {25, 49, 73, 95};
    for (int f = 0; f < 4; ++f) {
        int trunk = 0;
        for (int b = feeder_start[f]; b < feeder_end[f]; ++b) {
            const int pos = b - feeder_start[f];
            Branch br;
            const bool lateral = pos % 4 == 3;
            br.from = lateral ? b - 1 : trunk;
            br.to = b;
            const double len = lateral ? 0.6 : 1.0;
            br.r = 0.0045 * len * (1.0 + 0.15 * (f % 2));
            br.x = 0.0060 * len;
            br.smax = pos == 0 ? 60.0 : 30.0;
            net.branches.push_back(br);
            if (!lateral) trunk = b;
        }
    }

    const int nodes[18] = {7, 9, 12, 16, 20, 26, 28, 31, 38, 45, 52, 61, 66, 77, 80, 83, 84, 90};
    const int pv_nodes[7] = {7, 9, 16, 26, 31, 77, 84};
    const auto prices = energy_prices(T);
    c.prices.energy = prices;
    c.prices.reserve = reserve_prices(prices);
    c.forecast = Forecast(18, T);
    for (int i = 0; i < 18; ++i) {
        const int node = nodes[i];
        net.buses[node - 1].prosumer = i;
        ProsumerParams p;
        p.i = i;
        const bool big = node == 28 || node == 61 || node == 83;
        p.pg_min = big ? 0.3 : 0.15;
        p.pg_max = big ? 5.0 : 4.5;
        p.msr = 0.05;
        p.ru = big ? 1.5 : 1.2;
        p.rd = p.ru;
        p.pg_init = big ? 1.5 : 1.0;
        p.alpha_g = big ? 3.0 + 0.1 * i : 5.0 + 0.15 * i;
        p.beta_g = 20.0 + 0.3 * i;
        p.pd_flex_max.assign(T, 0.0);
        for (int t = 10; t <= 12; ++t) p.pd_flex_max[t] = 0.45;
        for (int t = 14; t <= 18; ++t) p.pd_flex_max[t] = 0.45;
        if (i % 3 == 0) {
            p.ps_max = 0.25;
            p.eta = 0.9;
            p.q_min = 0.0;
            p.q_cap = 1.0;
            p.q_init = 0.0;
            p.alpha_s = 2.0;
            p.beta_s = 0.5;
        }
        p.alpha_u = 8.0;
        p.beta_u = 90.0;
        c.prosumers.push_back(p);

        const double level = 0.5 + 1.5 * ((i * 7) % 18) / 17.0;  // average demand 0.5..2 MW
        for (int t = 0; t < T; ++t) {
            c.forecast.load_at(i, t) = level * (0.85 + 0.2 * bump(t, 19.0, 3.0) + 0.1 * bump(t, 9.0, 2.0));
        }
        for (int n : pv_nodes) {
            if (n == node) {
                const double peak = 1.0 + 0.25 * (i % 4);
                for (int t = 0; t < T; ++t) c.forecast.pv_at(i, t) = peak * pv_shape(t);
            }
        }
    }
    c.sigma_pv = 0.3;
    c.sigma_d = 0.1;

    std::vector<double> flat(T, 1.0), day(T, 0.0);
    for (int t = 8; t < 20; ++t) day[t] = 2.0;
    c.sweep.power = make_contract(1, 0, 1, flat, flat);
    c.sweep.energy = make_contract(2, 0, 1, day, flat);

    c.options.n_scenarios = 10;
    c.options.seed = 95;
    c.options.theorem_tol = 1e-5;
    return c;
}

}  // namespace dso
