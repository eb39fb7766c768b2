#include "dso/grid.hpp"

#include "dso/dispatch.hpp"

#include <cmath>
#include <numeric>
#include <queue>
#include <sstream>

namespace dso {

int Network::substation() const {
    for (const auto& b : buses) {
        if (b.is_substation) return b.id;
    }
    return -1;
}

int Network::bus_of(int prosumer) const {
    for (const auto& b : buses) {
        if (b.prosumer && *b.prosumer == prosumer) return b.id;
    }
    return -1;
}

bool ValidationReport::has(std::string_view code) const {
    for (const auto& v : violations) {
        if (v.code == code) return true;
    }
    return false;
}

std::string ValidationReport::summary() const {
    std::ostringstream os;
    for (std::size_t k = 0; k < violations.size(); ++k) {
        if (k) os << "; ";
        os << violations[k].code << ": " << violations[k].detail;
    }
    return os.str();
}

namespace {

int find_root(std::vector<int>& parent, int a) {
    while (parent[a] != a) {
        parent[a] = parent[parent[a]];
        a = parent[a];
    }
    return a;
}

}  // namespace

ValidationReport validate_network(const Network& net) {
    ValidationReport rep;
    auto add = [&](std::string code, std::string detail) { rep.violations.push_back({std::move(code), std::move(detail)}); };
    const int nb = net.n_buses();
    if (nb == 0) {
        add("empty", "network has no buses");
        return rep;
    }
    if (!(net.s_base > 0.0) || !(net.v_base > 0.0)) add("bad bases", "s_base and v_base must be positive");
    if (net.e_ex_max < 0.0) add("bad exchange limit", "e_ex_max must be nonnegative");

    int n_sub = 0;
    std::vector<int> prosumer_seen;
    for (int k = 0; k < nb; ++k) {
        const Bus& b = net.buses[k];
        if (b.id != k) add("bad id", "bus at position " + std::to_string(k) + " has id " + std::to_string(b.id));
        if (!(b.vmin > 0.0) || !(b.vmin <= b.vmax)) add("bad bounds", "bus " + std::to_string(k) + " voltage limits");
        if (!(b.reactive_pf > 0.0 && b.reactive_pf <= 1.0)) {
            add("bad bounds", "bus " + std::to_string(k) + " power factor outside (0, 1]");
        }
        if (b.is_substation) ++n_sub;
        if (b.prosumer) {
            if (*b.prosumer < 0) add("bad prosumer", "bus " + std::to_string(k) + " has a negative prosumer index");
            for (int seen : prosumer_seen) {
                if (seen == *b.prosumer) {
                    add("duplicate prosumer", "prosumer " + std::to_string(seen) + " is placed on several buses");
                }
            }
            prosumer_seen.push_back(*b.prosumer);
        }
    }
    if (n_sub == 0) add("missing substation", "no bus is marked as substation");
    if (n_sub > 1) add("multiple substations", std::to_string(n_sub) + " buses are marked as substation");
    const int root = net.substation();
    if (root >= 0 && (net.v_ref * net.v_ref < net.buses[root].vmin * net.buses[root].vmin - 1e-12 ||
                      net.v_ref > net.buses[root].vmax + 1e-12)) {
        add("bad bounds", "substation reference voltage outside its limits");
    }

    bool endpoints_ok = true;
    for (int k = 0; k < net.n_branches(); ++k) {
        const Branch& br = net.branches[k];
        const std::string name = "branch " + std::to_string(k);
        if (br.from < 0 || br.from >= nb || br.to < 0 || br.to >= nb) {
            add("bad endpoint", name + " references a missing bus");
            endpoints_ok = false;
            continue;
        }
        if (br.from == br.to) add("self loop", name + " connects a bus to itself");
        if (br.r < 0.0 || br.x < 0.0) add("bad bounds", name + " has negative impedance");
        if (!(br.smax > 0.0)) add("bad bounds", name + " rating must be positive");
        if (!(br.gamma > 0.0)) add("bad bounds", name + " voltage coefficient must be positive");
    }
    if (!endpoints_ok) return rep;

    std::vector<int> uf(nb);
    std::iota(uf.begin(), uf.end(), 0);
    bool cycle = false;
    for (const Branch& br : net.branches) {
        const int a = find_root(uf, br.from);
        const int b = find_root(uf, br.to);
        if (a == b) {
            cycle = true;
        } else {
            uf[a] = b;
        }
    }
    if (cycle) add("non-radial (cycle)", "branch set contains a cycle");
    int components = 0;
    for (int k = 0; k < nb; ++k) components += find_root(uf, k) == k;
    if (components > 1) add("disconnected", std::to_string(components) + " connected components");

    if (!cycle && components == 1 && root >= 0) {
        // every branch must point away from the substation
        std::vector<std::vector<int>> adj(nb);
        for (int k = 0; k < net.n_branches(); ++k) {
            adj[net.branches[k].from].push_back(k);
            adj[net.branches[k].to].push_back(k);
        }
        std::vector<int> depth(nb, -1);
        std::queue<int> q;
        depth[root] = 0;
        q.push(root);
        while (!q.empty()) {
            const int u = q.front();
            q.pop();
            for (int k : adj[u]) {
                const Branch& br = net.branches[k];
                const int w = br.from == u ? br.to : br.from;
                if (depth[w] >= 0) continue;
                depth[w] = depth[u] + 1;
                if (br.from != u) {
                    add("orientation", "branch " + std::to_string(k) + " points towards the substation");
                }
                q.push(w);
            }
        }
    }
    return rep;
}

ConstraintBlock build_distflow_block(const Network& net, const NodalInputs& in, int s, int t,
                                     const VariableMap& vars) {
    ConstraintBlock blk;
    const int nb = net.n_buses();
    if (static_cast<int>(in.pb_mw.size()) != nb || static_cast<int>(in.qd_mvar.size()) != nb) {
        throw AssemblyError("nodal inputs do not match the bus count");
    }
    const double S = net.s_base;
    const int root = net.substation();

    std::vector<std::vector<Term>> active(nb), reactive(nb);
    for (int k = 0; k < net.n_branches(); ++k) {
        const Branch& br = net.branches[k];
        const int up = br.from;
        const int dn = br.to;
        const int p = vars.at(Symbol::Pf, s, k, t);
        const int q = vars.at(Symbol::Qf, s, k, t);
        const int l = vars.at(Symbol::L, s, k, t);
        const int vu = vars.at(Symbol::V, s, up, t);
        const int vd = vars.at(Symbol::V, s, dn, t);

        auto& a = active[dn];
        a.push_back({p, 1.0});
        if (br.gs != 0.0) {
            a.push_back({vd, br.gs / 2.0});
            a.push_back({vu, br.gs / 2.0});
        }
        a.push_back({l, -br.r});
        active[up].push_back({p, -1.0});

        auto& rq = reactive[dn];
        rq.push_back({q, 1.0});
        if (br.bs != 0.0) {
            rq.push_back({vd, -br.bs / 2.0});
            rq.push_back({vu, -br.bs / 2.0});
        }
        rq.push_back({l, -br.x});
        reactive[up].push_back({q, -1.0});

        // l * v_dn >= p^2 + q^2
        ConeRow loss;
        loss.tag = ConeTag::Loss;
        loss.s = s;
        loss.idx = k;
        loss.t = t;
        loss.members.push_back(Affine().add(l, 1.0).add(vd, 1.0));
        loss.members.push_back(Affine().add(p, 2.0));
        loss.members.push_back(Affine().add(q, 2.0));
        loss.members.push_back(Affine().add(l, 1.0).add(vd, -1.0));
        blk.cones.push_back(std::move(loss));

        blk.eq({RowTag::VoltageDrop, s, k, t},
               {{vd, 1.0}, {vu, -br.gamma}, {p, 2.0 * br.r}, {q, 2.0 * br.x}, {l, -(br.r * br.r + br.x * br.x)}},
               0.0);

        ConeRow flow;
        flow.tag = ConeTag::Flow;
        flow.s = s;
        flow.idx = k;
        flow.t = t;
        flow.members.push_back(Affine(br.smax / S));
        flow.members.push_back(Affine().add(p, 1.0));
        flow.members.push_back(Affine().add(q, 1.0));
        blk.cones.push_back(std::move(flow));
    }

    for (int i = 0; i < nb; ++i) {
        const Bus& bus = net.buses[i];
        auto a = std::move(active[i]);
        auto r = std::move(reactive[i]);
        if (i == root) {
            a.push_back({vars.at_st(Symbol::Psub, s, t), 1.0});
            r.push_back({vars.at_st(Symbol::Qsub, s, t), 1.0});
        }
        if (bus.prosumer) a.push_back({vars.at(Symbol::PE, s, *bus.prosumer, t), 1.0 / S});
        blk.eq({RowTag::ActiveInjection, s, i, t}, std::move(a), -in.pb_mw[i] / S);
        blk.eq({RowTag::ReactiveInjection, s, i, t}, std::move(r), -in.qd_mvar[i] / S);

        const int v = vars.at(Symbol::V, s, i, t);
        blk.box(RowTag::VoltageLower, RowTag::VoltageUpper, RowTag::VoltageUpper, s, i, t, v,
                bus.vmin * bus.vmin, bus.vmax * bus.vmax);
        if (i == root) blk.eq({RowTag::SubstationVoltage, s, i, t}, {{v, 1.0}}, net.v_ref * net.v_ref);
    }
    return blk;
}

double total_loss(const DispatchResult& result, const Network& net, int s, int t) {
    double acc = 0.0;
    for (int k = 0; k < net.n_branches(); ++k) acc += net.branches[k].r * result.l[result.at_sbt(s, k, t)];
    return acc * net.s_base;
}

}  // namespace dso
