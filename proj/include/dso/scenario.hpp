#pragma once

// Monte-Carlo PV / load scenarios around per-(prosumer, period) forecasts.

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

namespace dso {

class ScenarioError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Forecast {
    int n_prosumers = 0;
    int horizon = 0;
    std::vector<double> pv;    // (i, t), MW
    std::vector<double> load;  // (i, t), MW

    Forecast() = default;
    Forecast(int n_p, int T) : n_prosumers(n_p), horizon(T), pv(n_p * T, 0.0), load(n_p * T, 0.0) {}
    double& pv_at(int i, int t) { return pv[i * horizon + t]; }
    double& load_at(int i, int t) { return load[i * horizon + t]; }
    double pv_at(int i, int t) const { return pv[i * horizon + t]; }
    double load_at(int i, int t) const { return load[i * horizon + t]; }
};

struct ScenarioSet {
    int n_scenarios = 0;
    int n_prosumers = 0;
    int horizon = 0;
    std::vector<double> omega;
    std::vector<double> pv;    // (s, i, t), MW
    std::vector<double> load;  // (s, i, t), MW
    std::uint64_t seed = 0;
    std::string algorithm;
    std::size_t clamped_pv = 0;
    std::size_t clamped_load = 0;

    std::size_t index(int s, int i, int t) const {
        return (static_cast<std::size_t>(s) * n_prosumers + i) * horizon + t;
    }
    double pv_at(int s, int i, int t) const { return pv[index(s, i, t)]; }
    double load_at(int s, int i, int t) const { return load[index(s, i, t)]; }
    /// Smallest load of prosumer i over all scenarios and periods.
    double min_load(int i) const;
    /// Throws ScenarioError when probabilities or tensors are malformed.
    void validate() const;
};

inline constexpr const char* kScenarioAlgorithm = "mt19937_64/splitmix64-substream/box-muller";

/// Independent normal deviations per (s, i, t) around the forecast, clamped at
/// zero, with equal probabilities. A series whose forecast is zero at (i, t)
/// stays zero there (no PV at night, no load for a pure producer). Each
/// scenario draws from its own substream, so scenario s does not depend on n_s.
ScenarioSet generate(const Forecast& forecast, double sigma_pv, double sigma_d, int n_scenarios,
                     std::uint64_t seed);

/// Keeps k scenarios: sorts by total net load, splits into k equal strata,
/// keeps each stratum's median scenario with the stratum's total probability.
/// Survivors keep their original relative order.
ScenarioSet reduce(const ScenarioSet& set, int k);

/// Columns s,i,t,pv,load,omega (omega repeated on every row of a scenario).
/// The reader also accepts omega on one row per scenario or no omega column.
void write_scenarios_csv(std::ostream& os, const ScenarioSet& set);
ScenarioSet read_scenarios_csv(std::istream& is);

/// Columns i,t,pv_mean,load_mean.
void write_forecast_csv(std::ostream& os, const Forecast& f);
Forecast read_forecast_csv(std::istream& is);

}  // namespace dso
