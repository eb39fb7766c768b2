// Built with -mavx2 -mfma -ffp-contract=off; only called after a runtime CPU check.

#include "dso/kernels.hpp"

#include <immintrin.h>

#include <algorithm>
#include <cmath>
#include <limits>

namespace dso::kernels::avx2 {

namespace {

inline double hmin(__m256d v) {
    __m128d lo = _mm256_castpd256_pd128(v);
    __m128d hi = _mm256_extractf128_pd(v, 1);
    __m128d m = _mm_min_pd(lo, hi);
    return std::min(_mm_cvtsd_f64(m), _mm_cvtsd_f64(_mm_unpackhi_pd(m, m)));
}

inline double hmax(__m256d v) {
    __m128d lo = _mm256_castpd256_pd128(v);
    __m128d hi = _mm256_extractf128_pd(v, 1);
    __m128d m = _mm_max_pd(lo, hi);
    return std::max(_mm_cvtsd_f64(m), _mm_cvtsd_f64(_mm_unpackhi_pd(m, m)));
}

}  // namespace

double dot(const double* x, const double* y, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        acc = _mm256_add_pd(acc, _mm256_mul_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
    }
    alignas(32) double lanes[4];
    _mm256_store_pd(lanes, acc);
    double sum = (lanes[0] + lanes[2]) + (lanes[1] + lanes[3]);
    for (; i < n; ++i) sum += x[i] * y[i];
    return sum;
}

void axpy(double a, const double* x, double* y, std::size_t n) {
    const __m256d va = _mm256_set1_pd(a);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d vy = _mm256_add_pd(_mm256_loadu_pd(y + i), _mm256_mul_pd(va, _mm256_loadu_pd(x + i)));
        _mm256_storeu_pd(y + i, vy);
    }
    for (; i < n; ++i) y[i] += a * x[i];
}

void axpby(double a, const double* x, double b, double* y, std::size_t n) {
    const __m256d va = _mm256_set1_pd(a);
    const __m256d vb = _mm256_set1_pd(b);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d vy = _mm256_add_pd(_mm256_mul_pd(va, _mm256_loadu_pd(x + i)),
                                   _mm256_mul_pd(vb, _mm256_loadu_pd(y + i)));
        _mm256_storeu_pd(y + i, vy);
    }
    for (; i < n; ++i) y[i] = a * x[i] + b * y[i];
}

double norm_inf(const double* x, std::size_t n) {
    const __m256d sign = _mm256_set1_pd(-0.0);
    __m256d m = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        m = _mm256_max_pd(m, _mm256_andnot_pd(sign, _mm256_loadu_pd(x + i)));
    }
    double r = hmax(m);
    for (; i < n; ++i) r = std::max(r, std::abs(x[i]));
    return r;
}

double min_element(const double* x, std::size_t n) {
    __m256d m = _mm256_set1_pd(std::numeric_limits<double>::infinity());
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) m = _mm256_min_pd(m, _mm256_loadu_pd(x + i));
    double r = hmin(m);
    for (; i < n; ++i) r = std::min(r, x[i]);
    return r;
}

void hadamard(const double* x, const double* y, double* out, std::size_t n) {
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        _mm256_storeu_pd(out + i, _mm256_mul_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
    }
    for (; i < n; ++i) out[i] = x[i] * y[i];
}

void nonneg_scaling(const double* s, const double* z, double* w, double* lambda, std::size_t n) {
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d vs = _mm256_loadu_pd(s + i);
        __m256d vz = _mm256_loadu_pd(z + i);
        _mm256_storeu_pd(w + i, _mm256_sqrt_pd(_mm256_div_pd(vs, vz)));
        _mm256_storeu_pd(lambda + i, _mm256_sqrt_pd(_mm256_mul_pd(vs, vz)));
    }
    for (; i < n; ++i) {
        w[i] = std::sqrt(s[i] / z[i]);
        lambda[i] = std::sqrt(s[i] * z[i]);
    }
}

double nonneg_step(const double* u, const double* du, std::size_t n) {
    const __m256d inf = _mm256_set1_pd(std::numeric_limits<double>::infinity());
    const __m256d zero = _mm256_setzero_pd();
    const __m256d sign = _mm256_set1_pd(-0.0);
    __m256d m = inf;
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d vd = _mm256_loadu_pd(du + i);
        __m256d neg = _mm256_cmp_pd(vd, zero, _CMP_LT_OQ);
        __m256d ratio = _mm256_div_pd(_mm256_xor_pd(_mm256_loadu_pd(u + i), sign), vd);
        m = _mm256_min_pd(m, _mm256_blendv_pd(inf, ratio, neg));
    }
    double r = hmin(m);
    for (; i < n; ++i) {
        if (du[i] < 0.0) r = std::min(r, -u[i] / du[i]);
    }
    return r;
}

}  // namespace dso::kernels::avx2
