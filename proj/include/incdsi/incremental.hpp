#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "incdsi/index.hpp"
#include "incdsi/lbfgs.hpp"
#include "incdsi/matrix.hpp"
#include "incdsi/objective.hpp"

namespace incdsi {

/// Outcome of inserting one document.
struct AddReport {
  std::string doc_id;
  std::size_t row = 0;
  bool feasible = false;
  /// Iterations of the committed attempt (>= 1).
  int iterations = 0;
  /// Iterations summed over every attempt, restarts included.
  int total_iterations = 0;
  int restarts = 0;
  bool converged_by_tol = false;
  /// Total loss of the committed vector under the caller's hyperparameters.
  double final_loss = 0.0;
  /// min_j (d_j - z_j . v_new) over pre-existing rows.
  double min_old_margin = 0.0;
  /// q_bar . v_new - max_j q_bar . v_j over pre-existing rows.
  double new_margin = 0.0;
  double wall_millis = 0.0;
};

struct Feasibility {
  bool feasible = false;
  double new_margin = 0.0;
  double min_old_margin = 0.0;
};

/// Strict check of both insertion constraints for candidate `v`:
/// q_bar . v > max_j q_bar . v_j and z_j . v < d_j for every existing row j.
/// On an empty index both margins are +inf and the candidate is feasible.
Feasibility check_feasibility(const IndexView& index, std::span<const float> v,
                              std::span<const float> q_bar);

struct RestartPlan {
  Hyperparams hp;
  std::uint64_t seed;
};

inline constexpr int kDefaultMaxRestarts = 3;

/// Restart `attempt` (1-based) shrinks both margins by 0.5^attempt and draws a
/// fresh initialization seed. Throws InvalidArgument unless 1 <= attempt <= max_restarts.
RestartPlan restart_policy(int attempt, const Hyperparams& hp, std::uint64_t seed,
                           int max_restarts = kDefaultMaxRestarts);

struct AddOptions {
  Hyperparams hp;
  OptimizerConfig optimizer;
  /// Base seed; the initialization seed of each document also mixes in the
  /// row it will occupy, so replays from a snapshot are reproducible.
  std::uint64_t seed = 0;
  int max_restarts = kDefaultMaxRestarts;
};

/// Initial candidate: i.i.d. N(0, 1/dim) entries.
std::vector<double> random_init(std::size_t dim, std::uint64_t seed);

/// Optimizes a vector for a new document and appends it to `state`.
///
/// The document is always committed; when no attempt reaches feasibility the
/// lowest-loss candidate is stored and the report is flagged infeasible.
/// Throws InvalidArgument (no queries, bad hyperparameters), DuplicateIdError
/// or ShapeError, leaving `state` unchanged.
AddReport add_document(IndexState& state, const std::string& doc_id, const Matrix& queries,
                       const AddOptions& options);

struct PendingDocument {
  std::string doc_id;
  Matrix queries;  // one query embedding per row
};

/// Adds documents strictly in order; each sees every earlier addition.
/// Ids are validated against the index and within the batch before anything is added.
std::vector<AddReport> add_stream(IndexState& state, std::span<const PendingDocument> docs,
                                  const AddOptions& options);

}  // namespace incdsi
