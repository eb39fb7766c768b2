#include "doctest.h"

#include "dso/kernels.hpp"

#include <cmath>
#include <cstring>
#include <limits>
#include <random>
#include <stdexcept>
#include <vector>

using namespace dso::kernels;

namespace {

std::vector<double> random_vec(std::mt19937_64& rng, std::size_t n, double lo, double hi) {
    std::uniform_real_distribution<double> u(lo, hi);
    std::vector<double> v(n);
    for (auto& x : v) x = u(rng);
    return v;
}

bool same_bits(double a, double b) { return std::memcmp(&a, &b, sizeof a) == 0; }

bool same_bits(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (!same_bits(a[i], b[i])) return false;
    }
    return true;
}

struct BackendGuard {
    Backend saved = active_backend();
    ~BackendGuard() { set_backend(saved); }
};

// Runs fn under each backend and returns both results.
template <class F>
auto on_both(F fn) {
    BackendGuard g;
    set_backend(Backend::Scalar);
    auto a = fn();
    set_backend(Backend::Avx2);
    auto b = fn();
    return std::pair{a, b};
}

}  // namespace

TEST_CASE("scalar kernels agree with naive loops") {
    BackendGuard g;
    set_backend(Backend::Scalar);
    std::mt19937_64 rng(7);
    for (std::size_t n : {0u, 1u, 3u, 4u, 5u, 17u, 64u}) {
        auto x = random_vec(rng, n, -2.0, 2.0);
        auto y = random_vec(rng, n, -2.0, 2.0);
        double ref = 0.0, mx = 0.0, mn = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < n; ++i) {
            ref += x[i] * y[i];
            mx = std::max(mx, std::abs(x[i]));
            mn = std::min(mn, x[i]);
        }
        CHECK(dot(x, y) == doctest::Approx(ref).epsilon(1e-14));
        CHECK(norm_inf(x) == mx);
        CHECK(min_element(x) == mn);

        auto z = y;
        axpy(0.5, x, z);
        for (std::size_t i = 0; i < n; ++i) CHECK(z[i] == doctest::Approx(y[i] + 0.5 * x[i]));
        z = y;
        axpby(2.0, x, -1.0, z);
        for (std::size_t i = 0; i < n; ++i) CHECK(z[i] == doctest::Approx(2.0 * x[i] - y[i]));
        std::vector<double> h(n);
        hadamard(x, y, h);
        for (std::size_t i = 0; i < n; ++i) CHECK(h[i] == x[i] * y[i]);
    }
}

TEST_CASE("nonnegative scaling satisfies w^2 z = s and lambda = w z") {
    BackendGuard g;
    set_backend(Backend::Scalar);
    std::mt19937_64 rng(11);
    auto s = random_vec(rng, 13, 1e-3, 5.0);
    auto z = random_vec(rng, 13, 1e-3, 5.0);
    std::vector<double> w(13), lam(13);
    nonneg_scaling(s, z, w, lam);
    for (std::size_t i = 0; i < s.size(); ++i) {
        CHECK(w[i] * w[i] * z[i] == doctest::Approx(s[i]).epsilon(1e-13));
        CHECK(lam[i] == doctest::Approx(w[i] * z[i]).epsilon(1e-13));
    }
}

TEST_CASE("nonnegative step length") {
    BackendGuard g;
    set_backend(Backend::Scalar);
    std::vector<double> u{1.0, 2.0, 3.0, 4.0, 5.0};
    std::vector<double> du{1.0, -4.0, 0.0, -1.0, 2.0};
    CHECK(nonneg_step(u, du) == doctest::Approx(0.5));
    std::vector<double> up{0.0, 1.0, 2.0, 3.0, 4.0};
    CHECK(std::isinf(nonneg_step(u, up)));
    CHECK(std::isinf(min_element(std::span<const double>{})));
}

TEST_CASE("AVX2 kernels are bitwise equal to the scalar reference") {
    if (!avx2_available()) {
        MESSAGE("AVX2 unavailable; equivalence skipped");
        CHECK_THROWS_AS(set_backend(Backend::Avx2), std::invalid_argument);
        return;
    }
    std::mt19937_64 rng(2024);
    for (std::size_t n = 0; n <= 41; ++n) {
        CAPTURE(n);
        const auto x = random_vec(rng, n, -3.0, 3.0);
        const auto y = random_vec(rng, n, -3.0, 3.0);
        const auto s = random_vec(rng, n, 1e-6, 10.0);
        const auto zz = random_vec(rng, n, 1e-6, 10.0);
        auto du = random_vec(rng, n, -1.0, 1.0);
        if (n > 2) du[n / 2] = 0.0;

        auto [d0, d1] = on_both([&] { return dot(x, y); });
        CHECK(same_bits(d0, d1));
        auto [n0, n1] = on_both([&] { return norm_inf(x); });
        CHECK(same_bits(n0, n1));
        auto [m0, m1] = on_both([&] { return min_element(x); });
        CHECK(same_bits(m0, m1));
        auto [a0, a1] = on_both([&] {
            auto v = y;
            axpy(-0.37, x, v);
            return v;
        });
        CHECK(same_bits(a0, a1));
        auto [b0, b1] = on_both([&] {
            auto v = y;
            axpby(1.25, x, 0.5, v);
            return v;
        });
        CHECK(same_bits(b0, b1));
        auto [h0, h1] = on_both([&] {
            std::vector<double> v(n);
            hadamard(x, y, v);
            return v;
        });
        CHECK(same_bits(h0, h1));
        auto [w0, w1] = on_both([&] {
            std::vector<double> w(n), lam(n);
            nonneg_scaling(s, zz, w, lam);
            w.insert(w.end(), lam.begin(), lam.end());
            return w;
        });
        CHECK(same_bits(w0, w1));
        auto [t0, t1] = on_both([&] { return nonneg_step(s, du); });
        CHECK(same_bits(t0, t1));
    }
}
