#pragma once

// Assembly of the DSO's stochastic dispatch problem: prosumer DER blocks and
// balances, branch-flow network per scenario and period, wholesale market
// coupling, and the negated expected surplus as the objective.

#include "dso/der.hpp"
#include "dso/grid.hpp"
#include "dso/p2p.hpp"
#include "dso/program.hpp"
#include "dso/scenario.hpp"

#include <vector>

namespace dso {

struct Prices {
    std::vector<double> energy;   // $/MWh per period
    std::vector<double> reserve;  // $/MW per period
};

/// Everything P1 needs apart from the P2P plan.
struct Instance {
    Network net;
    std::vector<ProsumerParams> prosumers;
    ScenarioSet scenarios;
    Prices prices;

    int horizon() const { return scenarios.horizon; }
    int n_prosumers() const { return static_cast<int>(prosumers.size()); }
    ModelDims dims() const;
};

/// Throws AssemblyError when dimensions disagree or a prosumer has no bus.
void check_instance(const Instance& inst);

/// Expected load (omega-weighted over scenarios) times tan(acos(pf)) of the
/// hosting bus; zero for buses without a prosumer.
std::vector<double> reactive_demand(const Instance& inst, int t);

struct P1Problem {
    ConicProgram prog;
    VariableMap vars;
};

/// Builds P1 for one P2P plan. The plan enters only as constants in the
/// prosumer balances and nodal injections.
P1Problem assemble_p1(const Instance& inst, const NetTradePlan& plan);

}  // namespace dso
