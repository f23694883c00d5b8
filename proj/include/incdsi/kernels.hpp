#pragma once

#include <span>

// Dense vector kernels. All inner products accumulate in double regardless of
// the storage type so that scores used for retrieval, feasibility checks and
// the optimization objective agree bit-for-bit on identical inputs.

namespace incdsi::kernels {

double dot(std::span<const float> a, std::span<const float> b) noexcept;
double dot(std::span<const float> a, std::span<const double> b) noexcept;
double dot(std::span<const double> a, std::span<const double> b) noexcept;

/// y += alpha * x
void axpy(double alpha, std::span<const float> x, std::span<double> y) noexcept;
void axpy(double alpha, std::span<const double> x, std::span<double> y) noexcept;

double squared_norm(std::span<const double> x) noexcept;
double norm(std::span<const double> x) noexcept;

}  // namespace incdsi::kernels
