#pragma once

// Prosumer resources: thermal unit with upward reserve, storage, curtailable
// load, and the per-prosumer power balance. All quantities in MW / MWh with
// hourly periods.

#include "dso/program.hpp"

#include <optional>
#include <string>
#include <vector>

namespace dso {

struct ProsumerParams {
    int i = 0;
    // thermal unit
    double pg_min = 0.0;
    double pg_max = 0.0;
    double msr = 0.0;  // reserve ramp rate, MW/min
    double ru = 0.0;   // hourly ramp limits
    double rd = 0.0;
    std::optional<double> pg_init;  // output before the first period
    // curtailable load, cap per period
    std::vector<double> pd_flex_max;
    // storage
    double ps_max = 0.0;
    double eta = 1.0;
    double q_cap = 0.0;
    double q_min = 0.0;
    std::optional<double> q_init;
    // objective coefficients
    double alpha_g = 0.0, beta_g = 0.0;
    double alpha_s = 0.0, beta_s = 0.0;
    double alpha_u = 0.0, beta_u = 0.0;

    bool has_thermal() const { return pg_max > 0.0; }
    bool has_storage() const { return ps_max > 0.0 && q_cap > 0.0; }
    double initial_output() const { return pg_init.value_or(pg_min); }
    double initial_energy() const { return q_init.value_or(q_min); }
    double reserve_cap() const { return 10.0 * msr; }
    double flex_cap(int t) const { return pd_flex_max.empty() ? 0.0 : pd_flex_max.at(t); }
};

/// Violated parameter invariants; empty when the record is usable.
std::vector<std::string> validate_prosumer(const ProsumerParams& p, int horizon);

/// Output bounds, reserve caps and ramp limits. A unit with pg_max = 0 is
/// absent: output and reserve are fixed to zero and ramps are skipped.
ConstraintBlock thermal_block(const ProsumerParams& p, int s, int t, const VariableMap& vars);

/// Rate bounds, energy recursion anchored at the initial state, capacity box
/// (including the state reached after the last period), and the degradation
/// epigraph d >= P^c + P^dis that replaces the charge/discharge binaries.
ConstraintBlock storage_block(const ProsumerParams& p, int s, int t, const VariableMap& vars);

/// 0 <= P^D <= cap(t), fixed to zero when the cap is zero.
ConstraintBlock flexdemand_block(const ProsumerParams& p, int s, int t, const VariableMap& vars);

/// P^g + eta P^dis - P^c / eta + P^D - P^E = P^d - P^PV + P^B
ConstraintBlock balance_block(const ProsumerParams& p, double pb_mw, double pv_mw, double load_mw, int s,
                              int t, const VariableMap& vars);

/// -alpha_u (d - D)^2 + beta_u (d - D)
double utility(const ProsumerParams& p, double load_mw, double curtailed_mw);
/// alpha_g P^2 + beta_g P
double generation_cost(const ProsumerParams& p, double pg_mw);
/// alpha_s |P^dis - P^c| + beta_s (beta_s only for prosumers that own storage)
double degradation_cost(const ProsumerParams& p, double pc_mw, double pdis_mw);

/// Adds omega * (C - U) for one (s, i, t) to a minimization objective, with the
/// degradation magnitude represented by the epigraph variable d.
void add_prosumer_objective(ProgramBuilder& pb, const ProsumerParams& p, int s, int t, double omega,
                            double load_mw, const VariableMap& vars);

}  // namespace dso
