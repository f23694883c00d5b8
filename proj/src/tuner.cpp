#include "incdsi/tuner.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <ostream>

#include "incdsi/errors.hpp"

namespace incdsi {

void SearchSpace::validate() const {
  if (!(lambda1_lo > 0.0 && lambda1_lo <= lambda1_hi && lambda1_hi < 1.0)) {
    throw InvalidArgument("lambda1 range must lie inside (0, 1)");
  }
  if (!(gamma1_lo >= 0.0 && gamma1_lo <= gamma1_hi) || !(gamma2_lo >= 0.0 && gamma2_lo <= gamma2_hi)) {
    throw InvalidArgument("margin ranges must be non-negative and ordered");
  }
  if (!(lambda2_lo > 0.0 && lambda2_lo <= lambda2_hi)) {
    throw InvalidArgument("lambda2 range must be positive and ordered for a log-uniform draw");
  }
}

Hyperparams sample_config(std::mt19937_64& rng, const SearchSpace& space, LossVariant variant) {
  space.validate();
  auto uniform = [&rng](double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
  };
  constexpr double tiny = std::numeric_limits<double>::denorm_min();
  Hyperparams hp;
  hp.lambda1 = uniform(space.lambda1_lo, space.lambda1_hi);
  hp.gamma1 = std::max(uniform(space.gamma1_lo, space.gamma1_hi), tiny);
  hp.gamma2 = std::max(uniform(space.gamma2_lo, space.gamma2_hi), tiny);
  hp.lambda2 = std::exp(uniform(std::log(space.lambda2_lo), std::log(space.lambda2_hi)));
  hp.lambda2 = std::clamp(hp.lambda2, space.lambda2_lo, space.lambda2_hi);
  hp.loss_variant = variant;
  return hp;
}

TuneResult tune(const IndexState& base, std::span<const PendingDocument> tune_docs,
                const QuerySet& val_orig, const QuerySet& val_tune, const TuneOptions& options) {
  if (tune_docs.empty()) throw InvalidArgument("tuning needs at least one document");
  if (options.trials < 1) throw InvalidArgument("tuning needs at least one trial");
  if (!(options.beta > 0.0)) throw InvalidArgument("beta must be > 0");

  std::mt19937_64 rng(options.seed);
  TuneResult out;
  out.trials.reserve(static_cast<std::size_t>(options.trials));
  for (int t = 0; t < options.trials; ++t) {
    TrialRecord rec;
    rec.trial = t;
    rec.hp = sample_config(rng, options.space, options.loss_variant);

    const auto started = std::chrono::steady_clock::now();
    IndexState trial_state = base;
    AddOptions add_opts{rec.hp, options.optimizer, options.seed, options.max_restarts};
    const auto reports = add_stream(trial_state, tune_docs, add_opts);
    rec.wall_millis =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - started)
            .count();

    std::size_t feasible = 0;
    for (const auto& r : reports) feasible += r.feasible ? 1 : 0;
    rec.feasible_fraction = static_cast<double>(feasible) / static_cast<double>(reports.size());
    rec.y_orig = mrr10(trial_state, val_orig);
    rec.y_tune = mrr10(trial_state, val_tune);
    rec.y_target = options.objective ? options.objective(rec)
                                     : f_beta_target(rec.y_tune, rec.y_orig, options.beta);
    out.trials.push_back(rec);
    if (t == 0 || rec.y_target > out.trials[static_cast<std::size_t>(out.best_trial)].y_target) {
      out.best_trial = t;
    }
  }
  out.best = out.trials[static_cast<std::size_t>(out.best_trial)].hp;
  return out;
}

void write_trials_csv(std::ostream& out, std::span<const TrialRecord> trials) {
  out << "trial,lambda1,lambda2,gamma1,gamma2,y_tune,y_orig,y_target,wall_millis\n";
  const auto old_precision = out.precision(std::numeric_limits<double>::max_digits10);
  for (const auto& t : trials) {
    out << t.trial << ',' << t.hp.lambda1 << ',' << t.hp.lambda2 << ',' << t.hp.gamma1 << ','
        << t.hp.gamma2 << ',' << t.y_tune << ',' << t.y_orig << ',' << t.y_target << ','
        << t.wall_millis << '\n';
  }
  out.precision(old_precision);
}

}  // namespace incdsi
