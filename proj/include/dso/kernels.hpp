#pragma once

// Dense vector kernels used by the interior-point solver.
//
// Every kernel has a portable scalar reference implementation and an AVX2
// variant. The variant is chosen once at first use from the CPU feature set;
// tests may pin a backend with set_backend() to compare the two.

#include <span>
#include <string_view>

namespace dso::kernels {

enum class Backend { Scalar, Avx2 };

std::string_view backend_name(Backend b);

/// True when the running CPU supports AVX2 and FMA and the AVX2 code was built.
bool avx2_available();

Backend active_backend();

/// Pins the backend. Throws std::invalid_argument if the backend is unavailable.
void set_backend(Backend b);

double dot(std::span<const double> x, std::span<const double> y);

/// y += a * x
void axpy(double a, std::span<const double> x, std::span<double> y);

/// y = a * x + b * y
void axpby(double a, std::span<const double> x, double b, std::span<double> y);

double norm_inf(std::span<const double> x);

/// Smallest element; +inf for an empty span.
double min_element(std::span<const double> x);

/// out = x .* y
void hadamard(std::span<const double> x, std::span<const double> y, std::span<double> out);

/// Nesterov-Todd scaling of the nonnegative orthant:
///   w = sqrt(s ./ z), lambda = sqrt(s .* z)
void nonneg_scaling(std::span<const double> s, std::span<const double> z,
                    std::span<double> w, std::span<double> lambda);

/// Largest alpha with u + alpha * du >= 0 element-wise (+inf if unbounded).
double nonneg_step(std::span<const double> u, std::span<const double> du);

namespace scalar {
double dot(const double* x, const double* y, std::size_t n);
void axpy(double a, const double* x, double* y, std::size_t n);
void axpby(double a, const double* x, double b, double* y, std::size_t n);
double norm_inf(const double* x, std::size_t n);
double min_element(const double* x, std::size_t n);
void hadamard(const double* x, const double* y, double* out, std::size_t n);
void nonneg_scaling(const double* s, const double* z, double* w, double* lambda, std::size_t n);
double nonneg_step(const double* u, const double* du, std::size_t n);
}  // namespace scalar

namespace avx2 {
double dot(const double* x, const double* y, std::size_t n);
void axpy(double a, const double* x, double* y, std::size_t n);
void axpby(double a, const double* x, double b, double* y, std::size_t n);
double norm_inf(const double* x, std::size_t n);
double min_element(const double* x, std::size_t n);
void hadamard(const double* x, const double* y, double* out, std::size_t n);
void nonneg_scaling(const double* s, const double* z, double* w, double* lambda, std::size_t n);
double nonneg_step(const double* u, const double* du, std::size_t n);
}  // namespace avx2

}  // namespace dso::kernels
