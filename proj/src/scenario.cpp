#include "dso/scenario.hpp"

#include "dso/csv.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <numbers>
#include <numeric>
#include <ostream>
#include <random>

namespace dso {

namespace {

std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

// Standard normal pairs by Box-Muller on 53-bit uniforms; unlike
// std::normal_distribution this is the same on every standard library.
class NormalStream {
public:
    NormalStream(std::uint64_t seed, std::uint64_t stream) {
        std::uint64_t st = seed ^ (stream * 0xD1B54A32D192ED03ULL);
        std::seed_seq seq{splitmix64(st), splitmix64(st), splitmix64(st), splitmix64(st)};
        eng_.seed(seq);
    }

    std::pair<double, double> pair() {
        constexpr double scale = 1.0 / 9007199254740992.0;  // 2^-53
        const double u1 = (static_cast<double>(eng_() >> 11) + 1.0) * scale;  // (0, 1]
        const double u2 = static_cast<double>(eng_() >> 11) * scale;          // [0, 1)
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 2.0 * std::numbers::pi * u2;
        return {r * std::cos(a), r * std::sin(a)};
    }

private:
    std::mt19937_64 eng_;
};

}  // namespace

double ScenarioSet::min_load(int i) const {
    double m = std::numeric_limits<double>::infinity();
    for (int s = 0; s < n_scenarios; ++s) {
        for (int t = 0; t < horizon; ++t) m = std::min(m, load_at(s, i, t));
    }
    return m;
}

void ScenarioSet::validate() const {
    if (n_scenarios < 1 || n_prosumers < 0 || horizon < 1) throw ScenarioError("scenario set dimensions are invalid");
    const std::size_t cells = static_cast<std::size_t>(n_scenarios) * n_prosumers * horizon;
    if (omega.size() != static_cast<std::size_t>(n_scenarios) || pv.size() != cells || load.size() != cells) {
        throw ScenarioError("scenario tensors do not match their dimensions");
    }
    double sum = 0.0;
    for (double w : omega) {
        if (!(w > 0.0)) throw ScenarioError("scenario probabilities must be positive");
        sum += w;
    }
    if (std::abs(sum - 1.0) > 1e-12) throw ScenarioError("scenario probabilities do not sum to 1");
    for (std::size_t k = 0; k < cells; ++k) {
        if (!(pv[k] >= 0.0) || !(load[k] >= 0.0)) throw ScenarioError("negative PV or load in scenario set");
    }
}

ScenarioSet generate(const Forecast& f, double sigma_pv, double sigma_d, int n_scenarios, std::uint64_t seed) {
    if (n_scenarios < 1) throw ScenarioError("scenario count must be at least 1");
    if (sigma_pv < 0.0 || sigma_d < 0.0) throw ScenarioError("standard deviations must be nonnegative");
    ScenarioSet set;
    set.n_scenarios = n_scenarios;
    set.n_prosumers = f.n_prosumers;
    set.horizon = f.horizon;
    set.seed = seed;
    set.algorithm = kScenarioAlgorithm;
    set.omega.assign(n_scenarios, 1.0 / n_scenarios);
    const std::size_t cells = static_cast<std::size_t>(n_scenarios) * f.n_prosumers * f.horizon;
    set.pv.resize(cells);
    set.load.resize(cells);
    for (int s = 0; s < n_scenarios; ++s) {
        NormalStream rng(seed, static_cast<std::uint64_t>(s));
        for (int i = 0; i < f.n_prosumers; ++i) {
            for (int t = 0; t < f.horizon; ++t) {
                const auto [zp, zd] = rng.pair();  // always drawn to keep streams aligned
                const std::size_t k = set.index(s, i, t);
                const double pv_mean = f.pv_at(i, t);
                const double load_mean = f.load_at(i, t);
                double pv = pv_mean > 0.0 ? pv_mean + sigma_pv * zp : 0.0;
                double load = load_mean > 0.0 ? load_mean + sigma_d * zd : 0.0;
                if (pv < 0.0) {
                    pv = 0.0;
                    ++set.clamped_pv;
                }
                if (load < 0.0) {
                    load = 0.0;
                    ++set.clamped_load;
                }
                set.pv[k] = pv;
                set.load[k] = load;
            }
        }
    }
    return set;
}

ScenarioSet reduce(const ScenarioSet& set, int k) {
    if (k < 1 || k > set.n_scenarios) throw ScenarioError("reduced scenario count out of range");
    const int n = set.n_scenarios;
    const int cells = set.n_prosumers * set.horizon;
    std::vector<double> net(n, 0.0);
    for (int s = 0; s < n; ++s) {
        for (int c = 0; c < cells; ++c) {
            const std::size_t idx = static_cast<std::size_t>(s) * cells + c;
            net[s] += set.load[idx] - set.pv[idx];
        }
    }
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return net[a] < net[b]; });

    std::vector<std::pair<int, double>> kept;  // (scenario, weight)
    for (int j = 0; j < k; ++j) {
        const int lo = static_cast<int>(static_cast<long long>(j) * n / k);
        const int hi = static_cast<int>(static_cast<long long>(j + 1) * n / k);
        double w = 0.0;
        for (int r = lo; r < hi; ++r) w += set.omega[order[r]];
        kept.emplace_back(order[lo + (hi - lo - 1) / 2], w);
    }
    std::sort(kept.begin(), kept.end());

    ScenarioSet out;
    out.n_scenarios = k;
    out.n_prosumers = set.n_prosumers;
    out.horizon = set.horizon;
    out.seed = set.seed;
    out.algorithm = set.algorithm;
    out.clamped_pv = set.clamped_pv;
    out.clamped_load = set.clamped_load;
    double total = 0.0;
    for (const auto& [s, w] : kept) total += w;
    for (const auto& [s, w] : kept) {
        out.omega.push_back(k == n ? set.omega[s] : w / total);
        const auto first = static_cast<std::ptrdiff_t>(s) * cells;
        out.pv.insert(out.pv.end(), set.pv.begin() + first, set.pv.begin() + first + cells);
        out.load.insert(out.load.end(), set.load.begin() + first, set.load.begin() + first + cells);
    }
    return out;
}

void write_scenarios_csv(std::ostream& os, const ScenarioSet& set) {
    os << "s,i,t,pv,load,omega\n";
    for (int s = 0; s < set.n_scenarios; ++s) {
        for (int i = 0; i < set.n_prosumers; ++i) {
            for (int t = 0; t < set.horizon; ++t) {
                os << s << ',' << i << ',' << t << ',' << csv::num(set.pv_at(s, i, t)) << ','
                   << csv::num(set.load_at(s, i, t)) << ',' << csv::num(set.omega[s]) << '\n';
            }
        }
    }
}

ScenarioSet read_scenarios_csv(std::istream& is) {
    const csv::Table tab = csv::read(is);
    const int cs = tab.column("s"), ci = tab.column("i"), ct = tab.column("t");
    const int cpv = tab.column("pv"), cl = tab.column("load");
    const int cw = tab.find_column("omega");
    ScenarioSet set;
    for (const auto& row : tab.rows) {
        set.n_scenarios = std::max(set.n_scenarios, csv::to_int(row[cs]) + 1);
        set.n_prosumers = std::max(set.n_prosumers, csv::to_int(row[ci]) + 1);
        set.horizon = std::max(set.horizon, csv::to_int(row[ct]) + 1);
    }
    const std::size_t cells = static_cast<std::size_t>(set.n_scenarios) * set.n_prosumers * set.horizon;
    if (tab.rows.size() != cells) throw ScenarioError("scenario CSV does not cover every (s, i, t) exactly once");
    set.pv.assign(cells, -1.0);
    set.load.assign(cells, -1.0);
    set.omega.assign(set.n_scenarios, 0.0);
    std::vector<bool> seen(cells, false), has_w(set.n_scenarios, false);
    for (const auto& row : tab.rows) {
        const int s = csv::to_int(row[cs]), i = csv::to_int(row[ci]), t = csv::to_int(row[ct]);
        if (s < 0 || i < 0 || t < 0) throw ScenarioError("negative index in scenario CSV");
        const std::size_t k = set.index(s, i, t);
        if (seen[k]) throw ScenarioError("duplicate (s, i, t) in scenario CSV");
        seen[k] = true;
        set.pv[k] = csv::to_double(row[cpv]);
        set.load[k] = csv::to_double(row[cl]);
        if (cw >= 0 && !row[cw].empty()) {
            const double w = csv::to_double(row[cw]);
            if (has_w[s] && w != set.omega[s]) throw ScenarioError("scenario " + std::to_string(s) + " has two probabilities");
            set.omega[s] = w;
            has_w[s] = true;
        }
    }
    for (int s = 0; s < set.n_scenarios; ++s) {
        if (!has_w[s]) set.omega[s] = 1.0 / set.n_scenarios;
    }
    set.algorithm = "csv";
    set.validate();
    return set;
}

void write_forecast_csv(std::ostream& os, const Forecast& f) {
    os << "i,t,pv_mean,load_mean\n";
    for (int i = 0; i < f.n_prosumers; ++i) {
        for (int t = 0; t < f.horizon; ++t) {
            os << i << ',' << t << ',' << csv::num(f.pv_at(i, t)) << ',' << csv::num(f.load_at(i, t)) << '\n';
        }
    }
}

Forecast read_forecast_csv(std::istream& is) {
    const csv::Table tab = csv::read(is);
    const int ci = tab.column("i"), ct = tab.column("t"), cp = tab.column("pv_mean"), cl = tab.column("load_mean");
    int n_p = 0, T = 0;
    for (const auto& row : tab.rows) {
        n_p = std::max(n_p, csv::to_int(row[ci]) + 1);
        T = std::max(T, csv::to_int(row[ct]) + 1);
    }
    if (tab.rows.size() != static_cast<std::size_t>(n_p) * T) {
        throw ScenarioError("forecast CSV does not cover every (i, t) exactly once");
    }
    Forecast f(n_p, T);
    for (const auto& row : tab.rows) {
        const int i = csv::to_int(row[ci]), t = csv::to_int(row[ct]);
        f.pv_at(i, t) = csv::to_double(row[cp]);
        f.load_at(i, t) = csv::to_double(row[cl]);
    }
    return f;
}

}  // namespace dso
