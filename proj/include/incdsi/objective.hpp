#pragma once

#include <span>
#include <string>
#include <vector>

#include "incdsi/index.hpp"

namespace incdsi {

enum class LossVariant { squared_hinge, hinge };

std::string to_string(LossVariant variant);
/// Accepts "squared_hinge" or "hinge"; throws InvalidArgument otherwise.
LossVariant parse_loss_variant(const std::string& name);

/// Weights and margins of the document-insertion objective.
struct Hyperparams {
  double lambda1 = 0.5;   // trade-off between the new-document and old-document terms
  double lambda2 = 1e-5;  // L2 weight on the candidate vector
  double gamma1 = 1.0;    // margin by which the new document must win its own query
  double gamma2 = 1.0;    // margin by which every existing document keeps its own query
  LossVariant loss_variant = LossVariant::squared_hinge;

  /// Throws InvalidArgument unless 0 < lambda1 < 1, lambda2 >= 0, gamma1 > 0, gamma2 > 0.
  void validate() const;

  friend bool operator==(const Hyperparams&, const Hyperparams&) = default;
};

/// max_j q . v_j over the rows of `index`. Throws InvalidArgument on an empty index.
double max_existing_score(const IndexView& index, std::span<const float> query);

/// The loss for inserting one new document with representative query q_bar
/// against a frozen set of existing rows.
///
///   new-document term   l1(v) = h(c - q_bar.v + gamma1)
///   interference term   l2(v) = sum_j h(z_j.v - d_j + gamma2)
///   total               lambda1 l1 + (1 - lambda1) l2 + lambda2 |v|^2
///
/// with h(x) = max(0, x)^2 for the squared variant and max(0, x) for the plain
/// hinge. c is the best existing score for q_bar and is computed once; it does
/// not depend on v. For an empty index c = -inf and l1 vanishes.
class ObjectiveContext {
 public:
  ObjectiveContext(IndexView existing, std::vector<float> q_bar, const Hyperparams& hp);
  /// Uses a caller-supplied c instead of scanning the index.
  ObjectiveContext(IndexView existing, std::vector<float> q_bar, double c, const Hyperparams& hp);

  const IndexView& existing() const noexcept { return existing_; }
  std::span<const float> q_bar() const noexcept { return q_bar_; }
  double best_existing_score() const noexcept { return c_; }
  const Hyperparams& hyperparams() const noexcept { return hp_; }
  std::size_t dim() const noexcept { return q_bar_.size(); }

  double new_doc_loss(std::span<const double> v) const;
  double interference_loss(std::span<const double> v) const;
  double total_loss(std::span<const double> v) const;
  std::vector<double> gradient(std::span<const double> v) const;

  /// Total loss and its gradient in a single pass over the existing rows.
  /// At a hinge kink the zero branch of the subgradient is used.
  double value_and_gradient(std::span<const double> v, std::span<double> grad) const;

 private:
  void check_dim(std::size_t n) const;
  double hinge(double arg) const noexcept;
  /// d h / d arg (zero at and below the kink).
  double hinge_slope(double arg) const noexcept;

  IndexView existing_;
  std::vector<float> q_bar_;
  std::vector<double> q_bar_wide_;
  double c_;
  Hyperparams hp_;
};

}  // namespace incdsi
