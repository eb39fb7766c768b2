#include "dso/kernels.hpp"

#include <atomic>
#include <cassert>
#include <stdexcept>

namespace dso::kernels {

namespace {

Backend detect() {
    return avx2_available() ? Backend::Avx2 : Backend::Scalar;
}

std::atomic<Backend>& current() {
    static std::atomic<Backend> b{detect()};
    return b;
}

}  // namespace

std::string_view backend_name(Backend b) {
    switch (b) {
        case Backend::Scalar: return "scalar";
        case Backend::Avx2: return "avx2";
    }
    return "unknown";
}

bool avx2_available() {
#if defined(DSO_HAVE_AVX2) && (defined(__x86_64__) || defined(__i386__))
    static const bool ok = __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
    return ok;
#else
    return false;
#endif
}

Backend active_backend() { return current().load(std::memory_order_relaxed); }

void set_backend(Backend b) {
    if (b == Backend::Avx2 && !avx2_available()) {
        throw std::invalid_argument("AVX2 backend is not available on this CPU/build");
    }
    current().store(b, std::memory_order_relaxed);
}

#if defined(DSO_HAVE_AVX2)
#define DSO_DISPATCH(fn, ...) \
    (active_backend() == Backend::Avx2 ? avx2::fn(__VA_ARGS__) : scalar::fn(__VA_ARGS__))
#else
#define DSO_DISPATCH(fn, ...) scalar::fn(__VA_ARGS__)
#endif

double dot(std::span<const double> x, std::span<const double> y) {
    assert(x.size() == y.size());
    return DSO_DISPATCH(dot, x.data(), y.data(), x.size());
}

void axpy(double a, std::span<const double> x, std::span<double> y) {
    assert(x.size() == y.size());
    DSO_DISPATCH(axpy, a, x.data(), y.data(), x.size());
}

void axpby(double a, std::span<const double> x, double b, std::span<double> y) {
    assert(x.size() == y.size());
    DSO_DISPATCH(axpby, a, x.data(), b, y.data(), x.size());
}

double norm_inf(std::span<const double> x) { return DSO_DISPATCH(norm_inf, x.data(), x.size()); }

double min_element(std::span<const double> x) {
    return DSO_DISPATCH(min_element, x.data(), x.size());
}

void hadamard(std::span<const double> x, std::span<const double> y, std::span<double> out) {
    assert(x.size() == y.size() && x.size() == out.size());
    DSO_DISPATCH(hadamard, x.data(), y.data(), out.data(), x.size());
}

void nonneg_scaling(std::span<const double> s, std::span<const double> z, std::span<double> w,
                    std::span<double> lambda) {
    assert(s.size() == z.size() && s.size() == w.size() && s.size() == lambda.size());
    DSO_DISPATCH(nonneg_scaling, s.data(), z.data(), w.data(), lambda.data(), s.size());
}

double nonneg_step(std::span<const double> u, std::span<const double> du) {
    assert(u.size() == du.size());
    return DSO_DISPATCH(nonneg_step, u.data(), du.data(), u.size());
}

#undef DSO_DISPATCH

}  // namespace dso::kernels
