#include "incdsi/kernels.hpp"

#include <cmath>
#include <cstddef>

namespace incdsi::kernels {

// The simd reductions are compiled with -fopenmp-simd; the summation order is
// fixed by the build, so results are deterministic for a given binary.

double dot(std::span<const float> a, std::span<const float> b) noexcept {
  const float* x = a.data();
  const float* y = b.data();
  const std::size_t n = a.size();
  double acc = 0.0;
#pragma omp simd reduction(+ : acc)
  for (std::size_t i = 0; i < n; ++i) {
    acc += static_cast<double>(x[i]) * static_cast<double>(y[i]);
  }
  return acc;
}

double dot(std::span<const float> a, std::span<const double> b) noexcept {
  const float* x = a.data();
  const double* y = b.data();
  const std::size_t n = a.size();
  double acc = 0.0;
#pragma omp simd reduction(+ : acc)
  for (std::size_t i = 0; i < n; ++i) {
    acc += static_cast<double>(x[i]) * y[i];
  }
  return acc;
}

double dot(std::span<const double> a, std::span<const double> b) noexcept {
  const double* x = a.data();
  const double* y = b.data();
  const std::size_t n = a.size();
  double acc = 0.0;
#pragma omp simd reduction(+ : acc)
  for (std::size_t i = 0; i < n; ++i) {
    acc += x[i] * y[i];
  }
  return acc;
}

void axpy(double alpha, std::span<const float> x, std::span<double> y) noexcept {
  const float* xs = x.data();
  double* ys = y.data();
  const std::size_t n = x.size();
#pragma omp simd
  for (std::size_t i = 0; i < n; ++i) {
    ys[i] += alpha * static_cast<double>(xs[i]);
  }
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) noexcept {
  const double* xs = x.data();
  double* ys = y.data();
  const std::size_t n = x.size();
#pragma omp simd
  for (std::size_t i = 0; i < n; ++i) {
    ys[i] += alpha * xs[i];
  }
}

double squared_norm(std::span<const double> x) noexcept { return dot(x, x); }

double norm(std::span<const double> x) noexcept { return std::sqrt(squared_norm(x)); }

}  // namespace incdsi::kernels
