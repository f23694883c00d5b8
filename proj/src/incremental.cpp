#include "incdsi/incremental.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <random>
#include <unordered_set>

#include "incdsi/errors.hpp"
#include "incdsi/kernels.hpp"

namespace incdsi {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

struct CandidateEval {
  Feasibility feasibility;
  double loss;
};

/// One pass over Z: strict constraint margins plus the total loss under `hp`.
CandidateEval evaluate_candidate(const IndexView& index, std::span<const float> v,
                                 std::span<const float> q_bar, double best_existing,
                                 const Hyperparams& hp) {
  std::vector<double> wide(v.begin(), v.end());
  const ObjectiveContext ctx(index, std::vector<float>(q_bar.begin(), q_bar.end()), best_existing,
                             hp);
  CandidateEval out{};
  out.feasibility.new_margin = index.empty() ? kInf : kernels::dot(q_bar, v) - best_existing;
  double min_old = kInf;
  index.for_each_span([&](const RowSpan& span) {
    for (std::size_t i = 0; i < span.count; ++i) {
      min_old = std::min(min_old, static_cast<double>(span.diag[i]) -
                                      kernels::dot(span.rep_query(i), v));
    }
  });
  out.feasibility.min_old_margin = min_old;
  out.feasibility.feasible =
      out.feasibility.new_margin > 0.0 && out.feasibility.min_old_margin > 0.0;
  out.loss = ctx.total_loss(wide);
  return out;
}

void validate_queries(const IndexState& state, const Matrix& queries) {
  if (queries.rows() == 0) throw InvalidArgument("a document needs at least one query embedding");
  if (queries.cols() != state.dim()) {
    throw ShapeError("query embeddings have dimension " + std::to_string(queries.cols()) +
                     ", index has " + std::to_string(state.dim()));
  }
  if (!queries.all_finite()) throw InvalidArgument("query embeddings contain non-finite entries");
}

}  // namespace

Feasibility check_feasibility(const IndexView& index, std::span<const float> v,
                              std::span<const float> q_bar) {
  if (v.size() != q_bar.size() || (!index.empty() && v.size() != index.dim())) {
    throw ShapeError("candidate and query dimensions must match the index");
  }
  if (index.empty()) return Feasibility{true, kInf, kInf};
  const double best = max_existing_score(index, q_bar);
  Feasibility out;
  out.new_margin = kernels::dot(q_bar, v) - best;
  out.min_old_margin = kInf;
  index.for_each_span([&](const RowSpan& span) {
    for (std::size_t i = 0; i < span.count; ++i) {
      out.min_old_margin = std::min(out.min_old_margin, static_cast<double>(span.diag[i]) -
                                                            kernels::dot(span.rep_query(i), v));
    }
  });
  out.feasible = out.new_margin > 0.0 && out.min_old_margin > 0.0;
  return out;
}

RestartPlan restart_policy(int attempt, const Hyperparams& hp, std::uint64_t seed,
                           int max_restarts) {
  if (attempt < 1 || attempt > max_restarts) {
    throw InvalidArgument("restart attempt " + std::to_string(attempt) + " outside [1, " +
                          std::to_string(max_restarts) + "]");
  }
  RestartPlan plan{hp, 0};
  const double shrink = std::ldexp(1.0, -attempt);
  plan.hp.gamma1 *= shrink;
  plan.hp.gamma2 *= shrink;
  plan.seed = splitmix64(seed ^ (0xa0761d6478bd642fULL * static_cast<std::uint64_t>(attempt)));
  if (plan.seed == seed) plan.seed = splitmix64(plan.seed);
  return plan;
}

std::vector<double> random_init(std::size_t dim, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0 / std::sqrt(static_cast<double>(dim)));
  std::vector<double> v(dim);
  for (double& x : v) x = normal(rng);
  return v;
}

AddReport add_document(IndexState& state, const std::string& doc_id, const Matrix& queries,
                       const AddOptions& options) {
  const auto started = std::chrono::steady_clock::now();
  validate_queries(state, queries);
  if (state.contains(doc_id)) throw DuplicateIdError("duplicate doc id: " + doc_id);
  options.hp.validate();
  options.optimizer.validate();
  if (options.max_restarts < 0) throw InvalidArgument("max_restarts must be >= 0");

  const std::vector<float> q_bar = representative_query(queries);
  const IndexView existing = state.view();
  const double best_existing =
      existing.empty() ? -kInf : max_existing_score(existing, q_bar);
  const std::uint64_t doc_seed =
      splitmix64(options.seed ^ splitmix64(static_cast<std::uint64_t>(state.size())));

  AddReport report;
  report.doc_id = doc_id;
  report.row = state.size();

  std::vector<float> best_vector;
  CandidateEval best_eval{};
  bool have_best = false;
  for (int attempt = 0; attempt <= options.max_restarts; ++attempt) {
    const RestartPlan plan = attempt == 0 ? RestartPlan{options.hp, doc_seed}
                                          : restart_policy(attempt, options.hp, doc_seed,
                                                           options.max_restarts);
    const ObjectiveContext ctx(existing, q_bar, best_existing, plan.hp);
    const MinimizeResult result = minimize(
        [&ctx](std::span<const double> v, std::span<double> g) {
          return ctx.value_and_gradient(v, g);
        },
        random_init(state.dim(), plan.seed), options.optimizer);
    report.total_iterations += result.iterations;

    std::vector<float> candidate(result.x.begin(), result.x.end());
    bool finite = true;
    for (float x : candidate) finite = finite && std::isfinite(x);
    if (!finite) continue;
    const CandidateEval eval =
        evaluate_candidate(existing, candidate, q_bar, best_existing, options.hp);
    const bool better = !have_best ||
                        (eval.feasibility.feasible && !best_eval.feasibility.feasible) ||
                        (eval.feasibility.feasible == best_eval.feasibility.feasible &&
                         eval.loss < best_eval.loss);
    if (better) {
      best_vector = std::move(candidate);
      best_eval = eval;
      have_best = true;
      report.iterations = result.iterations;
      report.converged_by_tol = result.converged_by_tol;
    }
    report.restarts = attempt;
    if (eval.feasibility.feasible) break;
  }
  if (!have_best) throw Error("optimization produced no finite candidate for " + doc_id);

  state.append(doc_id, best_vector, q_bar);

  report.feasible = best_eval.feasibility.feasible;
  report.new_margin = best_eval.feasibility.new_margin;
  report.min_old_margin = best_eval.feasibility.min_old_margin;
  report.final_loss = best_eval.loss;
  report.wall_millis =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - started)
          .count();
  return report;
}

std::vector<AddReport> add_stream(IndexState& state, std::span<const PendingDocument> docs,
                                  const AddOptions& options) {
  std::unordered_set<std::string> batch_ids;
  for (const auto& doc : docs) {
    if (state.contains(doc.doc_id) || !batch_ids.insert(doc.doc_id).second) {
      throw DuplicateIdError("duplicate doc id: " + doc.doc_id);
    }
    validate_queries(state, doc.queries);
  }
  std::vector<AddReport> reports;
  reports.reserve(docs.size());
  for (const auto& doc : docs) {
    reports.push_back(add_document(state, doc.doc_id, doc.queries, options));
  }
  return reports;
}

}  // namespace incdsi
