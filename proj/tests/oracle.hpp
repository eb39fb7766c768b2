#pragma once

// Brute-force reference for tiny single-bus instances. Evaluates the surplus
// of the original (non-relaxed) problem directly from the parameters: charge
// and discharge are never simultaneous and degradation uses |P^dis - P^c|.

#include "dso/model.hpp"

#include <string>
#include <vector>

namespace dso::oracle {

struct Point {
    std::vector<double> pg, pr, pd, pc, pdis;  // (t)
};

struct Result {
    double best_surplus = -1e300;
    Point best;
    long evaluated = 0;
    long feasible = 0;
};

/// Single bus hosting prosumer 0, no branches, one scenario, T <= 2. Every
/// dispatch variable is enumerated on a grid of `step` MW inside its bounds;
/// the reserve of each period is set to its largest feasible value, which is
/// optimal because the reserve price is nonnegative and each reserve appears
/// only in its own period's limits.
Result grid_search(const Instance& inst, double step = 0.01);

/// Surplus of one candidate, or nullopt-like -inf when infeasible.
double evaluate(const Instance& inst, const Point& p);

/// Single-bus instance with one prosumer and the given price / load / PV series.
Instance single_bus(const ProsumerParams& p, const std::vector<double>& energy_price,
                    const std::vector<double>& reserve_price, const std::vector<double>& load,
                    const std::vector<double>& pv, double e_ex_max = 50.0);

struct Named {
    std::string name;
    Instance inst;
};

/// One period with every resource; two periods with thermal and curtailable
/// load; two periods with thermal and storage.
std::vector<Named> reference_instances();

}  // namespace dso::oracle
