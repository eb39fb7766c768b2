#pragma once

// Second-order cone primitives for the interior-point solver. A cone vector
// u = (u0, u1) is interior when u0 > ||u1||. All routines work on raw spans so
// the solver can operate on slices of its flat iterate vectors.

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>

namespace dso::cones {

inline double soc_norm1(std::span<const double> u) {
    double acc = 0.0;
    for (std::size_t k = 1; k < u.size(); ++k) acc += u[k] * u[k];
    return std::sqrt(acc);
}

/// u0 - ||u1||, the smallest spectral value of u.
inline double soc_margin(std::span<const double> u) { return u[0] - soc_norm1(u); }

/// u0^2 - ||u1||^2, computed as (u0 - ||u1||)(u0 + ||u1||).
inline double soc_det(std::span<const double> u) {
    const double n = soc_norm1(u);
    return (u[0] - n) * (u[0] + n);
}

/// Jordan product u o v = (u'v, u0 v1 + v0 u1).
inline void jordan_product(std::span<const double> u, std::span<const double> v, std::span<double> out) {
    double d = 0.0;
    for (std::size_t k = 0; k < u.size(); ++k) d += u[k] * v[k];
    for (std::size_t k = 1; k < u.size(); ++k) out[k] = u[0] * v[k] + v[0] * u[k];
    out[0] = d;
}

/// Solves u o x = v for x (u interior).
inline void jordan_divide(std::span<const double> u, std::span<const double> v, std::span<double> x) {
    double u1v1 = 0.0;
    for (std::size_t k = 1; k < u.size(); ++k) u1v1 += u[k] * v[k];
    const double x0 = (u[0] * v[0] - u1v1) / soc_det(u);
    for (std::size_t k = 1; k < u.size(); ++k) x[k] = (v[k] - x0 * u[k]) / u[0];
    x[0] = x0;
}

/// Nesterov-Todd scaling point of one cone: W = eta * [[w0, w1'], [w1, I + w1 w1'/(1 + w0)]]
/// with w0^2 - ||w1||^2 = 1, satisfying W z = W^{-1} s.
struct SocScaling {
    double eta = 1.0;
    std::span<double> w;  // storage owned by the caller, same length as the cone
};

inline void soc_nt_scaling(std::span<const double> s, std::span<const double> z, SocScaling& sc) {
    const std::size_t m = s.size();
    const double ds = std::sqrt(std::max(soc_det(s), std::numeric_limits<double>::min()));
    const double dz = std::sqrt(std::max(soc_det(z), std::numeric_limits<double>::min()));
    double sz = 0.0;
    for (std::size_t k = 0; k < m; ++k) sz += (s[k] / ds) * (z[k] / dz);
    const double gamma = std::sqrt(std::max((1.0 + sz) / 2.0, 0.0));
    sc.w[0] = (s[0] / ds + z[0] / dz) / (2.0 * gamma);
    for (std::size_t k = 1; k < m; ++k) sc.w[k] = (s[k] / ds - z[k] / dz) / (2.0 * gamma);
    sc.eta = std::sqrt(ds / dz);
}

/// out = W v
inline void soc_apply_w(const SocScaling& sc, std::span<const double> v, std::span<double> out) {
    const std::size_t m = v.size();
    const double w0 = sc.w[0];
    double w1v1 = 0.0;
    for (std::size_t k = 1; k < m; ++k) w1v1 += sc.w[k] * v[k];
    const double c = v[0] + w1v1 / (1.0 + w0);
    const double o0 = w0 * v[0] + w1v1;
    for (std::size_t k = 1; k < m; ++k) out[k] = sc.eta * (v[k] + c * sc.w[k]);
    out[0] = sc.eta * o0;
}

/// out = W^{-1} v
inline void soc_apply_winv(const SocScaling& sc, std::span<const double> v, std::span<double> out) {
    const std::size_t m = v.size();
    const double w0 = sc.w[0];
    double w1v1 = 0.0;
    for (std::size_t k = 1; k < m; ++k) w1v1 += sc.w[k] * v[k];
    const double c = -v[0] + w1v1 / (1.0 + w0);
    const double o0 = w0 * v[0] - w1v1;
    for (std::size_t k = 1; k < m; ++k) out[k] = (v[k] + c * sc.w[k]) / sc.eta;
    out[0] = o0 / sc.eta;
}

/// Dense H = W^2 in row-major order (m x m).
inline void soc_hessian(const SocScaling& sc, std::size_t m, std::span<double> H) {
    double e[16];
    double col[16];
    double tmp[16];
    for (std::size_t j = 0; j < m; ++j) {
        std::fill(e, e + m, 0.0);
        e[j] = 1.0;
        soc_apply_w(sc, {e, m}, {tmp, m});
        soc_apply_w(sc, {tmp, m}, {col, m});
        for (std::size_t i = 0; i < m; ++i) H[i * m + j] = col[i];
    }
}

/// Largest alpha with u + alpha du in the cone (+inf if the ray never leaves it).
inline double soc_step(std::span<const double> u, std::span<const double> du) {
    constexpr double inf = std::numeric_limits<double>::infinity();
    if (soc_margin(du) >= 0.0) return inf;
    double a = du[0] * du[0];
    double b = u[0] * du[0];
    for (std::size_t k = 1; k < u.size(); ++k) {
        a -= du[k] * du[k];
        b -= u[k] * du[k];
    }
    const double c = std::max(soc_det(u), 0.0);
    if (c == 0.0) return 0.0;
    // f(alpha) = a alpha^2 + 2 b alpha + c, f(0) = c > 0
    if (a == 0.0) return b < 0.0 ? -c / (2.0 * b) : inf;
    const double disc = b * b - a * c;
    if (disc < 0.0) return inf;
    const double sq = std::sqrt(disc);
    const double qq = -(b + std::copysign(sq, b));
    double best = inf;
    const double r1 = qq / a;
    const double r2 = qq != 0.0 ? c / qq : inf;
    if (r1 > 0.0) best = std::min(best, r1);
    if (r2 > 0.0) best = std::min(best, r2);
    return best;
}

}  // namespace dso::cones
