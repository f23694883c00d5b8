#include "incdsi/objective.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "incdsi/errors.hpp"
#include "incdsi/kernels.hpp"

namespace incdsi {

std::string to_string(LossVariant variant) {
  return variant == LossVariant::hinge ? "hinge" : "squared_hinge";
}

LossVariant parse_loss_variant(const std::string& name) {
  if (name == "squared_hinge") return LossVariant::squared_hinge;
  if (name == "hinge") return LossVariant::hinge;
  throw InvalidArgument("unknown loss variant: " + name);
}

void Hyperparams::validate() const {
  if (!(lambda1 > 0.0 && lambda1 < 1.0)) throw InvalidArgument("lambda1 must lie in (0, 1)");
  if (!(lambda2 >= 0.0) || !std::isfinite(lambda2)) throw InvalidArgument("lambda2 must be >= 0");
  if (!(gamma1 > 0.0) || !std::isfinite(gamma1)) throw InvalidArgument("gamma1 must be > 0");
  if (!(gamma2 > 0.0) || !std::isfinite(gamma2)) throw InvalidArgument("gamma2 must be > 0");
}

double max_existing_score(const IndexView& index, std::span<const float> query) {
  if (index.empty()) throw InvalidArgument("max_existing_score on an empty index");
  if (query.size() != index.dim()) throw ShapeError("query dimension does not match the index");
  double best = -std::numeric_limits<double>::infinity();
  index.for_each_span([&](const RowSpan& span) {
    for (std::size_t i = 0; i < span.count; ++i) {
      best = std::max(best, kernels::dot(query, span.doc_vector(i)));
    }
  });
  return best;
}

ObjectiveContext::ObjectiveContext(IndexView existing, std::vector<float> q_bar,
                                   const Hyperparams& hp)
    : ObjectiveContext(existing, q_bar,
                       existing.empty() ? -std::numeric_limits<double>::infinity()
                                        : max_existing_score(existing, q_bar),
                       hp) {}

ObjectiveContext::ObjectiveContext(IndexView existing, std::vector<float> q_bar, double c,
                                   const Hyperparams& hp)
    : existing_(std::move(existing)),
      q_bar_(std::move(q_bar)),
      q_bar_wide_(q_bar_.begin(), q_bar_.end()),
      c_(c),
      hp_(hp) {
  if (!existing_.empty() && q_bar_.size() != existing_.dim()) {
    throw ShapeError("representative query dimension does not match the index");
  }
}

void ObjectiveContext::check_dim(std::size_t n) const {
  if (n != q_bar_.size()) throw ShapeError("candidate vector has the wrong dimension");
}

double ObjectiveContext::hinge(double arg) const noexcept {
  if (!(arg > 0.0)) return 0.0;
  return hp_.loss_variant == LossVariant::squared_hinge ? arg * arg : arg;
}

double ObjectiveContext::hinge_slope(double arg) const noexcept {
  if (!(arg > 0.0)) return 0.0;
  return hp_.loss_variant == LossVariant::squared_hinge ? 2.0 * arg : 1.0;
}

double ObjectiveContext::new_doc_loss(std::span<const double> v) const {
  check_dim(v.size());
  return hinge(c_ - kernels::dot(q_bar_wide_, v) + hp_.gamma1);
}

double ObjectiveContext::interference_loss(std::span<const double> v) const {
  check_dim(v.size());
  double loss = 0.0;
  existing_.for_each_span([&](const RowSpan& span) {
    for (std::size_t i = 0; i < span.count; ++i) {
      loss += hinge(kernels::dot(span.rep_query(i), v) - span.diag[i] + hp_.gamma2);
    }
  });
  return loss;
}

double ObjectiveContext::total_loss(std::span<const double> v) const {
  return hp_.lambda1 * new_doc_loss(v) + (1.0 - hp_.lambda1) * interference_loss(v) +
         hp_.lambda2 * kernels::squared_norm(v);
}

std::vector<double> ObjectiveContext::gradient(std::span<const double> v) const {
  std::vector<double> grad(v.size());
  value_and_gradient(v, grad);
  return grad;
}

double ObjectiveContext::value_and_gradient(std::span<const double> v,
                                            std::span<double> grad) const {
  check_dim(v.size());
  check_dim(grad.size());
  const double w1 = hp_.lambda1;
  const double w2 = 1.0 - hp_.lambda1;

  for (std::size_t i = 0; i < v.size(); ++i) grad[i] = 2.0 * hp_.lambda2 * v[i];
  double value = hp_.lambda2 * kernels::squared_norm(v);

  const double arg1 = c_ - kernels::dot(q_bar_wide_, v) + hp_.gamma1;
  value += w1 * hinge(arg1);
  if (const double slope = hinge_slope(arg1); slope != 0.0) {
    kernels::axpy(-w1 * slope, std::span<const float>(q_bar_), grad);
  }

  double interference = 0.0;
  existing_.for_each_span([&](const RowSpan& span) {
    for (std::size_t i = 0; i < span.count; ++i) {
      const auto z = span.rep_query(i);
      const double arg = kernels::dot(z, v) - span.diag[i] + hp_.gamma2;
      if (arg > 0.0) {
        interference += hinge(arg);
        kernels::axpy(w2 * hinge_slope(arg), z, grad);
      }
    }
  });
  return value + w2 * interference;
}

}  // namespace incdsi
