#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include "incdsi/objective.hpp"
#include "support/random.hpp"

namespace incdsi::testing {

/// Smallest distance of any hinge argument from its kink, scaled so that a
/// central difference of `step` along one coordinate cannot cross it when the
/// result is above 1.
inline double kink_clearance(const ObjectiveContext& ctx, std::span<const double> v, double step) {
  const auto& hp = ctx.hyperparams();
  const auto q = ctx.q_bar();
  double clearance = std::numeric_limits<double>::infinity();
  auto consider = [&](double arg, std::span<const float> coef) {
    double reach = 0.0;
    for (float c : coef) reach = std::max(reach, std::abs(static_cast<double>(c)));
    reach *= step;
    if (reach > 0.0) clearance = std::min(clearance, std::abs(arg) / reach);
  };
  const IndexView& idx = ctx.existing();
  if (!idx.empty()) {
    long double qv = 0.0L;
    for (std::size_t i = 0; i < v.size(); ++i) qv += static_cast<long double>(q[i]) * v[i];
    consider(ctx.best_existing_score() - static_cast<double>(qv) + hp.gamma1, q);
  }
  for (std::size_t j = 0; j < idx.size(); ++j) {
    const auto z = idx.rep_query(j);
    long double zv = 0.0L;
    for (std::size_t i = 0; i < v.size(); ++i) zv += static_cast<long double>(z[i]) * v[i];
    consider(static_cast<double>(zv) - idx.diag(j) + hp.gamma2, z);
  }
  return clearance;
}

/// |g - g_fd|_2 / max(|g_fd|_2, 1e-8) with central differences.
inline double fd_relative_error(const ObjectiveContext& ctx, std::vector<double> v, double step) {
  const std::vector<double> g = ctx.gradient(v);
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double orig = v[i];
    v[i] = orig + step;
    const double fp = ctx.total_loss(v);
    v[i] = orig - step;
    const double fm = ctx.total_loss(v);
    v[i] = orig;
    const double fd = (fp - fm) / (2.0 * step);
    num += (g[i] - fd) * (g[i] - fd);
    den += fd * fd;
  }
  return std::sqrt(num) / std::max(std::sqrt(den), 1e-8);
}

/// Draws a point whose hinge arguments all sit well away from their kinks.
inline std::optional<std::vector<double>> non_kink_point(const ObjectiveContext& ctx,
                                                         std::uint64_t seed, double scale,
                                                         double step, int attempts = 50) {
  for (int a = 0; a < attempts; ++a) {
    auto v = random_vector(ctx.dim(), seed + 7919 * a, scale);
    if (kink_clearance(ctx, v, step) > 4.0) return v;
  }
  return std::nullopt;
}

}  // namespace incdsi::testing
