#pragma once

// Radial distribution network and its branch-flow constraint rows.
//
// Network quantities are per-unit on (v_base, s_base); prosumer quantities
// (P^E, P^B, q^d) arrive in MW / MVAr and are divided by s_base here.

#include "dso/program.hpp"

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace dso {

struct DispatchResult;

struct Bus {
    int id = 0;
    double vmin = 0.95;  // voltage magnitude bounds, pu
    double vmax = 1.05;
    bool is_substation = false;
    std::optional<int> prosumer;
    double reactive_pf = 1.0;  // load power factor used for q^d
};

struct Branch {
    int from = 0;  // upstream bus (towards the substation)
    int to = 0;
    double r = 0.0;  // pu
    double x = 0.0;  // pu
    double gs = 0.0;
    double bs = 0.0;
    double smax = 0.0;  // MVA
    double gamma = 1.0;
};

struct Network {
    std::vector<Bus> buses;
    std::vector<Branch> branches;
    double e_ex_max = 0.0;  // MW
    double v_base = 11.0;   // kV
    double s_base = 10.0;   // MVA
    double v_ref = 1.0;     // substation voltage magnitude, pu

    int n_buses() const { return static_cast<int>(buses.size()); }
    int n_branches() const { return static_cast<int>(branches.size()); }
    /// Index of the first substation bus, or -1.
    int substation() const;
    /// Bus hosting prosumer i, or -1.
    int bus_of(int prosumer) const;
};

struct Violation {
    std::string code;
    std::string detail;
};

struct ValidationReport {
    std::vector<Violation> violations;
    bool ok() const { return violations.empty(); }
    bool has(std::string_view code) const;
    std::string summary() const;
};

/// Structural checks: ids, bounds, single substation, connectivity, radiality,
/// branch orientation away from the substation, unique prosumer placement.
ValidationReport validate_network(const Network& net);

/// Per-bus inputs of one (s, t): net P2P trade of the hosted prosumer and
/// reactive demand, both in MW / MVAr.
struct NodalInputs {
    std::vector<double> pb_mw;
    std::vector<double> qd_mvar;
};

/// Injection balances, loss and flow cones, voltage drops and voltage boxes
/// for one scenario and period. The substation bus draws its exchange through
/// a lossless virtual feeder (p_sub, q_sub) and holds v = v_ref^2.
ConstraintBlock build_distflow_block(const Network& net, const NodalInputs& in, int s, int t,
                                     const VariableMap& vars);

/// Sum of r * l over all branches for (s, t), in MW.
double total_loss(const DispatchResult& result, const Network& net, int s, int t);

}  // namespace dso
