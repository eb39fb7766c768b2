#include "dso/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace dso::kernels::scalar {

double dot(const double* x, const double* y, std::size_t n) {
    // Four partial sums in the same lane order as the AVX2 variant.
    double acc[4] = {0.0, 0.0, 0.0, 0.0};
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        for (std::size_t k = 0; k < 4; ++k) acc[k] += x[i + k] * y[i + k];
    }
    double sum = (acc[0] + acc[2]) + (acc[1] + acc[3]);
    for (; i < n; ++i) sum += x[i] * y[i];
    return sum;
}

void axpy(double a, const double* x, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

void axpby(double a, const double* x, double b, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] = a * x[i] + b * y[i];
}

double norm_inf(const double* x, std::size_t n) {
    double m = 0.0;
    for (std::size_t i = 0; i < n; ++i) m = std::max(m, std::abs(x[i]));
    return m;
}

double min_element(const double* x, std::size_t n) {
    double m = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) m = std::min(m, x[i]);
    return m;
}

void hadamard(const double* x, const double* y, double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] = x[i] * y[i];
}

void nonneg_scaling(const double* s, const double* z, double* w, double* lambda, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
        w[i] = std::sqrt(s[i] / z[i]);
        lambda[i] = std::sqrt(s[i] * z[i]);
    }
}

double nonneg_step(const double* u, const double* du, std::size_t n) {
    double alpha = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
        if (du[i] < 0.0) alpha = std::min(alpha, -u[i] / du[i]);
    }
    return alpha;
}

}  // namespace dso::kernels::scalar
