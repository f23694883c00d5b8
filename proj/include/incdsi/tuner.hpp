#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <random>
#include <span>
#include <vector>

#include "incdsi/incremental.hpp"
#include "incdsi/metrics.hpp"
#include "incdsi/objective.hpp"

namespace incdsi {

/// Search distributions for the insertion hyperparameters.
/// lambda1, gamma1 and gamma2 are uniform; lambda2 is log-uniform.
struct SearchSpace {
  double lambda1_lo = 0.05, lambda1_hi = 0.95;
  double gamma1_lo = 0.0, gamma1_hi = 10.0;
  double gamma2_lo = 0.0, gamma2_hi = 10.0;
  double lambda2_lo = 1e-8, lambda2_hi = 1e-3;

  void validate() const;
};

/// One draw from `space`. Margins drawn as exactly 0 are nudged to the
/// smallest positive double so the result always validates.
Hyperparams sample_config(std::mt19937_64& rng, const SearchSpace& space,
                          LossVariant variant = LossVariant::squared_hinge);

struct TrialRecord {
  int trial = 0;
  Hyperparams hp;
  double y_tune = 0.0;
  double y_orig = 0.0;
  double y_target = 0.0;
  double wall_millis = 0.0;
  double feasible_fraction = 0.0;
};

/// Scores a finished trial; the default is f_beta_target(y_tune, y_orig, beta).
using TrialObjective = std::function<double(const TrialRecord&)>;

struct TuneOptions {
  int trials = 50;
  double beta = 5.0;
  std::uint64_t seed = 0;
  SearchSpace space;
  LossVariant loss_variant = LossVariant::squared_hinge;
  OptimizerConfig optimizer;
  int max_restarts = kDefaultMaxRestarts;
  /// Overrides the F-beta objective when set.
  TrialObjective objective;
};

struct TuneResult {
  Hyperparams best;
  int best_trial = 0;
  std::vector<TrialRecord> trials;
};

/// Random search. Each trial inserts every tuning document into a private copy
/// of `base` and scores MRR@10 on the original and tuning validation queries.
/// The highest-scoring trial wins; ties keep the earliest.
TuneResult tune(const IndexState& base, std::span<const PendingDocument> tune_docs,
                const QuerySet& val_orig, const QuerySet& val_tune, const TuneOptions& options);

/// Header plus one row per trial:
/// trial,lambda1,lambda2,gamma1,gamma2,y_tune,y_orig,y_target,wall_millis
void write_trials_csv(std::ostream& out, std::span<const TrialRecord> trials);

}  // namespace incdsi
