#pragma once

#include <cstddef>
#include <deque>
#include <functional>
#include <span>
#include <vector>

namespace incdsi {

struct OptimizerConfig {
  int max_iterations = 30;
  double update_norm_tol = 1e-3;  // stop once |x_{k+1} - x_k|_2 falls below this
  double initial_step = 1.0;
  int history_size = 10;
  double wolfe_c1 = 1e-4;
  double wolfe_c2 = 0.9;
  int max_line_search_evals = 25;

  /// Throws InvalidArgument unless 0 < c1 < c2 < 1, history_size >= 1,
  /// max_iterations >= 1 and all tolerances and budgets are positive.
  void validate() const;

  friend bool operator==(const OptimizerConfig&, const OptimizerConfig&) = default;
};

/// Evaluates f(x), writes grad f(x) into `grad` and returns f(x).
using ValueAndGradient = std::function<double(std::span<const double> x, std::span<double> grad)>;

struct MinimizeResult {
  std::vector<double> x;
  int iterations = 0;
  bool converged_by_tol = false;
  double final_value = 0.0;
  int function_evals = 0;
  /// Number of iterations whose strong-Wolfe search ran out of budget and fell
  /// back to a best-effort step.
  int line_search_fallbacks = 0;
  /// Set when no fallback step decreased f; the loop stopped at the best iterate.
  bool line_search_failed = false;
};

struct LineSearchResult {
  double step = 0.0;
  double value = 0.0;
  std::vector<double> x;
  std::vector<double> grad;
  int evals = 0;
  /// Both strong Wolfe conditions hold at `step`. When false the fields hold
  /// the lowest-value trial point seen.
  bool satisfied = false;
};

/// Strong Wolfe line search (bracketing + zoom with cubic interpolation).
///
/// Returns a step a along p with
///   f(x + a p) <= f(x) + c1 a p.g(x)   and   |p.g(x + a p)| <= c2 |p.g(x)|
/// or, when the evaluation budget runs out, the best trial point with
/// `satisfied == false`. Throws InvalidArgument if p is not a descent direction.
LineSearchResult strong_wolfe_line_search(const ValueAndGradient& fg, std::span<const double> x,
                                          double fx, std::span<const double> gx,
                                          std::span<const double> p, double initial_step,
                                          const OptimizerConfig& cfg);

/// Ring buffer of curvature pairs (s, y) for the two-loop recursion.
class CurvatureHistory {
 public:
  explicit CurvatureHistory(std::size_t capacity);

  /// Stores the pair unless s.y <= 1e-10 |s||y|; evicts the oldest pair when
  /// full. Returns whether the pair was kept.
  bool push(std::vector<double> s, std::vector<double> y);
  void clear() noexcept { pairs_.clear(); }
  std::size_t size() const noexcept { return pairs_.size(); }
  std::size_t capacity() const noexcept { return capacity_; }

  /// -H grad, where H is the L-BFGS inverse-Hessian estimate seeded with
  /// (s.y / y.y) I from the newest pair, or I when empty.
  std::vector<double> direction(std::span<const double> grad) const;

 private:
  struct Pair {
    std::vector<double> s;
    std::vector<double> y;
    double rho;
  };
  std::size_t capacity_;
  std::deque<Pair> pairs_;
};

/// Limited-memory BFGS with strong Wolfe line search.
///
/// Runs until `max_iterations` iterations have been taken or a step shorter
/// than `update_norm_tol` is accepted. Throws InvalidArgument when f or its
/// gradient is non-finite at x0.
MinimizeResult minimize(const ValueAndGradient& fg, std::vector<double> x0,
                        const OptimizerConfig& cfg);

}  // namespace incdsi
