#include "doctest.h"

#include "dso/scenario.hpp"

#include <cmath>
#include <cstring>
#include <numeric>
#include <sstream>

using namespace dso;

namespace {

Forecast small_forecast() {
    Forecast f(2, 3);
    for (int t = 0; t < 3; ++t) {
        f.pv_at(0, t) = t == 0 ? 0.0 : 1.0 + t;
        f.load_at(1, t) = 2.0 + 0.5 * t;
    }
    return f;
}

bool bitwise_equal(const std::vector<double>& a, const std::vector<double>& b) {
    return a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

double omega_sum(const ScenarioSet& s) { return std::accumulate(s.omega.begin(), s.omega.end(), 0.0); }

}  // namespace

TEST_CASE("zero spread reproduces the forecast in every scenario") {
    const Forecast f = small_forecast();
    const ScenarioSet s = generate(f, 0.0, 0.0, 5, 11);
    CHECK(s.n_scenarios == 5);
    for (int k = 0; k < 5; ++k) {
        CHECK(s.omega[k] == doctest::Approx(0.2));
        for (int i = 0; i < 2; ++i) {
            for (int t = 0; t < 3; ++t) {
                CHECK(s.pv_at(k, i, t) == f.pv_at(i, t));
                CHECK(s.load_at(k, i, t) == f.load_at(i, t));
            }
        }
    }
}

TEST_CASE("sample means converge to the forecast") {
    Forecast f(1, 1);
    f.pv_at(0, 0) = 5.0;
    f.load_at(0, 0) = 5.0;
    const ScenarioSet s = generate(f, 0.8, 0.3, 10000, 2024);
    double pv = 0.0, load = 0.0, pv2 = 0.0;
    for (int k = 0; k < s.n_scenarios; ++k) {
        pv += s.pv_at(k, 0, 0);
        load += s.load_at(k, 0, 0);
        pv2 += s.pv_at(k, 0, 0) * s.pv_at(k, 0, 0);
    }
    pv /= s.n_scenarios;
    load /= s.n_scenarios;
    CHECK(std::abs(pv - 5.0) <= 0.03);
    CHECK(std::abs(load - 5.0) <= 0.03);
    const double sd = std::sqrt(pv2 / s.n_scenarios - pv * pv);
    CHECK(sd == doctest::Approx(0.8).epsilon(0.03));
    CHECK(s.clamped_pv == 0);
}

TEST_CASE("negative draws are clamped at zero and counted") {
    Forecast f(1, 4);
    for (int t = 0; t < 4; ++t) {
        f.pv_at(0, t) = 0.1;
        f.load_at(0, t) = 0.1;
    }
    const ScenarioSet s = generate(f, 1.0, 1.0, 200, 5);
    CHECK(s.clamped_pv > 0);
    CHECK(s.clamped_load > 0);
    for (double v : s.pv) CHECK(v >= 0.0);
    for (double v : s.load) CHECK(v >= 0.0);
}

TEST_CASE("zero forecasts stay zero") {
    const ScenarioSet s = generate(small_forecast(), 0.8, 0.3, 50, 9);
    for (int k = 0; k < 50; ++k) {
        CHECK(s.pv_at(k, 0, 0) == 0.0);
        CHECK(s.pv_at(k, 1, 2) == 0.0);
        CHECK(s.load_at(k, 0, 1) == 0.0);
    }
}

TEST_CASE("identical seed and inputs give bitwise-identical scenarios") {
    const Forecast f = small_forecast();
    const ScenarioSet a = generate(f, 0.8, 0.3, 20, 77);
    const ScenarioSet b = generate(f, 0.8, 0.3, 20, 77);
    CHECK(bitwise_equal(a.pv, b.pv));
    CHECK(bitwise_equal(a.load, b.load));
    CHECK(bitwise_equal(a.omega, b.omega));
    const ScenarioSet c = generate(f, 0.8, 0.3, 20, 78);
    CHECK(!bitwise_equal(a.pv, c.pv));
}

TEST_CASE("scenario s does not depend on the number of scenarios") {
    const Forecast f = small_forecast();
    const ScenarioSet few = generate(f, 0.8, 0.3, 3, 77);
    const ScenarioSet many = generate(f, 0.8, 0.3, 30, 77);
    for (int k = 0; k < 3; ++k) {
        for (int i = 0; i < 2; ++i) {
            for (int t = 0; t < 3; ++t) {
                CHECK(few.pv_at(k, i, t) == many.pv_at(k, i, t));
                CHECK(few.load_at(k, i, t) == many.load_at(k, i, t));
            }
        }
    }
}

TEST_CASE("reduction to the full count is the identity") {
    const ScenarioSet s = generate(small_forecast(), 0.8, 0.3, 12, 4);
    const ScenarioSet r = reduce(s, 12);
    CHECK(bitwise_equal(r.pv, s.pv));
    CHECK(bitwise_equal(r.load, s.load));
    CHECK(bitwise_equal(r.omega, s.omega));
}

TEST_CASE("reduction to one scenario carries all probability") {
    const ScenarioSet r = reduce(generate(small_forecast(), 0.8, 0.3, 12, 4), 1);
    CHECK(r.n_scenarios == 1);
    CHECK(r.omega[0] == doctest::Approx(1.0).epsilon(1e-15));
    r.validate();
}

TEST_CASE("reduction from 1000 to 10 keeps normalized weights and is deterministic") {
    const ScenarioSet s = generate(small_forecast(), 0.8, 0.3, 1000, 4);
    const ScenarioSet r = reduce(s, 10);
    CHECK(r.n_scenarios == 10);
    CHECK(std::abs(omega_sum(r) - 1.0) <= 1e-12);
    const ScenarioSet again = reduce(s, 10);
    CHECK(bitwise_equal(r.pv, again.pv));
    CHECK_THROWS_AS(reduce(s, 0), ScenarioError);
    CHECK_THROWS_AS(reduce(s, 1001), ScenarioError);
}

TEST_CASE("scenario CSV round-trips exactly") {
    const ScenarioSet s = reduce(generate(small_forecast(), 0.8, 0.3, 40, 4), 7);
    std::stringstream ss;
    write_scenarios_csv(ss, s);
    const ScenarioSet back = read_scenarios_csv(ss);
    CHECK(back.n_scenarios == 7);
    CHECK(back.n_prosumers == 2);
    CHECK(back.horizon == 3);
    CHECK(bitwise_equal(back.pv, s.pv));
    CHECK(bitwise_equal(back.load, s.load));
    CHECK(bitwise_equal(back.omega, s.omega));
}

TEST_CASE("scenario CSV without omega gets equal weights; conflicting omegas are rejected") {
    std::istringstream plain("s,i,t,pv,load\n0,0,0,1,2\n1,0,0,3,4\n");
    const ScenarioSet s = read_scenarios_csv(plain);
    CHECK(s.omega == std::vector<double>{0.5, 0.5});
    std::istringstream conflict("s,i,t,pv,load,omega\n0,0,0,1,2,0.5\n0,0,1,1,2,0.25\n1,0,0,3,4,0.5\n1,0,1,3,4,0.5\n");
    CHECK_THROWS_AS(read_scenarios_csv(conflict), ScenarioError);
}

TEST_CASE("malformed scenario sets are rejected") {
    ScenarioSet s = generate(small_forecast(), 0.8, 0.3, 4, 4);
    s.validate();
    s.omega[0] += 0.1;
    CHECK_THROWS_AS(s.validate(), ScenarioError);
    ScenarioSet t = generate(small_forecast(), 0.8, 0.3, 4, 4);
    t.pv.pop_back();
    CHECK_THROWS_AS(t.validate(), ScenarioError);
    CHECK_THROWS_AS(generate(small_forecast(), -1.0, 0.3, 4, 4), ScenarioError);
    CHECK_THROWS_AS(generate(small_forecast(), 0.8, 0.3, 0, 4), ScenarioError);
}

TEST_CASE("forecast CSV round-trips") {
    const Forecast f = small_forecast();
    std::stringstream ss;
    write_forecast_csv(ss, f);
    const Forecast back = read_forecast_csv(ss);
    CHECK(back.n_prosumers == 2);
    CHECK(back.horizon == 3);
    CHECK(bitwise_equal(back.pv, f.pv));
    CHECK(bitwise_equal(back.load, f.load));
}
