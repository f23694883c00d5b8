#include "incdsi/lbfgs.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include "incdsi/errors.hpp"
#include "incdsi/kernels.hpp"

namespace incdsi {

namespace {

using kernels::dot;

bool all_finite(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

double max_abs(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

double l1_norm(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += std::abs(x);
  return s;
}

/// Minimizer of the cubic interpolating (x1, f1, g1) and (x2, f2, g2),
/// clamped to [lo, hi]. Falls back to bisection when the cubic has no real
/// minimizer or the data is not finite.
double cubic_interpolate(double x1, double f1, double g1, double x2, double f2, double g2,
                         double lo, double hi) {
  if (!std::isfinite(f1) || !std::isfinite(f2) || !std::isfinite(g1) || !std::isfinite(g2) ||
      x1 == x2) {
    return 0.5 * (lo + hi);
  }
  const double d1 = g1 + g2 - 3.0 * (f1 - f2) / (x1 - x2);
  const double d2_sq = d1 * d1 - g1 * g2;
  if (d2_sq < 0.0) return 0.5 * (lo + hi);
  const double d2 = std::sqrt(d2_sq);
  double min_pos;
  if (x1 <= x2) {
    min_pos = x2 - (x2 - x1) * ((g2 + d2 - d1) / (g2 - g1 + 2.0 * d2));
  } else {
    min_pos = x1 - (x1 - x2) * ((g1 + d2 - d1) / (g1 - g2 + 2.0 * d2));
  }
  if (!std::isfinite(min_pos)) return 0.5 * (lo + hi);
  return std::clamp(min_pos, lo, hi);
}

struct Trial {
  double t;
  double f;
  double gtd;
  std::vector<double> x;
  std::vector<double> g;
};

}  // namespace

void OptimizerConfig::validate() const {
  if (!(wolfe_c1 > 0.0 && wolfe_c1 < wolfe_c2 && wolfe_c2 < 1.0)) {
    throw InvalidArgument("Wolfe constants must satisfy 0 < c1 < c2 < 1");
  }
  if (history_size < 1) throw InvalidArgument("history_size must be >= 1");
  if (max_iterations < 1) throw InvalidArgument("max_iterations must be >= 1");
  if (max_line_search_evals < 1) throw InvalidArgument("max_line_search_evals must be >= 1");
  if (!(update_norm_tol > 0.0)) throw InvalidArgument("update_norm_tol must be > 0");
  if (!(initial_step > 0.0)) throw InvalidArgument("initial_step must be > 0");
}

LineSearchResult strong_wolfe_line_search(const ValueAndGradient& fg, std::span<const double> x,
                                          double fx, std::span<const double> gx,
                                          std::span<const double> p, double initial_step,
                                          const OptimizerConfig& cfg) {
  const double gtd0 = dot(gx, p);
  if (!(gtd0 < 0.0)) throw InvalidArgument("line search direction is not a descent direction");
  const double c1 = cfg.wolfe_c1;
  const double c2 = cfg.wolfe_c2;
  const std::size_t n = x.size();
  const double p_scale = max_abs(p);

  int evals = 0;
  auto evaluate = [&](double t) {
    Trial trial{t, 0.0, 0.0, std::vector<double>(x.begin(), x.end()), std::vector<double>(n)};
    kernels::axpy(t, p, trial.x);
    trial.f = fg(trial.x, trial.g);
    trial.gtd = dot(trial.g, p);
    ++evals;
    return trial;
  };
  auto armijo_fails = [&](const Trial& tr) { return !(tr.f <= fx + c1 * tr.t * gtd0); };
  auto curvature_holds = [&](const Trial& tr) { return std::abs(tr.gtd) <= -c2 * gtd0; };

  Trial start{0.0, fx, gtd0, std::vector<double>(x.begin(), x.end()),
              std::vector<double>(gx.begin(), gx.end())};
  Trial best = start;
  auto track_best = [&](const Trial& tr) {
    if (tr.f < best.f) best = tr;
  };

  auto finish = [&](const Trial& tr, bool satisfied) {
    LineSearchResult r;
    r.step = tr.t;
    r.value = tr.f;
    r.x = tr.x;
    r.grad = tr.g;
    r.evals = evals;
    r.satisfied = satisfied;
    return r;
  };

  // Bracketing phase.
  Trial prev = start;
  Trial cur = evaluate(initial_step);
  track_best(cur);
  Trial lo_end, hi_end;
  bool bracketed = false;
  for (int iter = 0;; ++iter) {
    if (!std::isfinite(cur.f) || armijo_fails(cur) || (iter > 0 && cur.f >= prev.f)) {
      lo_end = prev;
      hi_end = cur;
      bracketed = true;
      break;
    }
    if (curvature_holds(cur)) return finish(cur, true);
    if (cur.gtd >= 0.0) {
      lo_end = cur;
      hi_end = prev;
      bracketed = true;
      break;
    }
    if (evals >= cfg.max_line_search_evals) break;
    const double lo = cur.t + 0.01 * (cur.t - prev.t);
    const double hi = cur.t * 10.0;
    const double next = cubic_interpolate(prev.t, prev.f, prev.gtd, cur.t, cur.f, cur.gtd, lo, hi);
    prev = std::move(cur);
    cur = evaluate(next);
    track_best(cur);
  }
  if (!bracketed) return finish(best, false);

  // Zoom phase: lo_end always holds the lowest value satisfying sufficient decrease.
  bool insufficient_progress = false;
  while (evals < cfg.max_line_search_evals) {
    const double a = std::min(lo_end.t, hi_end.t);
    const double b = std::max(lo_end.t, hi_end.t);
    if ((b - a) * p_scale < 1e-12) break;
    double t = cubic_interpolate(lo_end.t, lo_end.f, lo_end.gtd, hi_end.t, hi_end.f, hi_end.gtd,
                                 a, b);
    // Keep trial points away from the bracket ends.
    const double eps = 0.1 * (b - a);
    if (std::min(b - t, t - a) < eps) {
      if (insufficient_progress || t >= b || t <= a) {
        t = std::abs(t - b) < std::abs(t - a) ? b - eps : a + eps;
        insufficient_progress = false;
      } else {
        insufficient_progress = true;
      }
    } else {
      insufficient_progress = false;
    }
    Trial trial = evaluate(t);
    track_best(trial);
    if (!std::isfinite(trial.f) || armijo_fails(trial) || trial.f >= lo_end.f) {
      hi_end = std::move(trial);
    } else {
      if (curvature_holds(trial)) return finish(trial, true);
      if (trial.gtd * (hi_end.t - lo_end.t) >= 0.0) hi_end = lo_end;
      lo_end = std::move(trial);
    }
  }
  return finish(best, false);
}

CurvatureHistory::CurvatureHistory(std::size_t capacity) : capacity_(capacity) {
  if (capacity == 0) throw InvalidArgument("history capacity must be >= 1");
}

bool CurvatureHistory::push(std::vector<double> s, std::vector<double> y) {
  const double sy = dot(s, y);
  if (!(sy > 1e-10 * kernels::norm(s) * kernels::norm(y))) return false;
  if (pairs_.size() == capacity_) pairs_.pop_front();
  pairs_.push_back(Pair{std::move(s), std::move(y), 1.0 / sy});
  return true;
}

std::vector<double> CurvatureHistory::direction(std::span<const double> grad) const {
  std::vector<double> q(grad.begin(), grad.end());
  std::vector<double> alpha(pairs_.size());
  for (std::size_t k = pairs_.size(); k-- > 0;) {
    const Pair& pr = pairs_[k];
    alpha[k] = pr.rho * dot(pr.s, q);
    kernels::axpy(-alpha[k], pr.y, q);
  }
  double scale = 1.0;
  if (!pairs_.empty()) {
    const Pair& last = pairs_.back();
    scale = dot(last.s, last.y) / dot(last.y, last.y);
  }
  for (double& v : q) v *= scale;
  for (std::size_t k = 0; k < pairs_.size(); ++k) {
    const Pair& pr = pairs_[k];
    const double beta = pr.rho * dot(pr.y, q);
    kernels::axpy(alpha[k] - beta, pr.s, q);
  }
  for (double& v : q) v = -v;
  return q;
}

MinimizeResult minimize(const ValueAndGradient& fg, std::vector<double> x0,
                        const OptimizerConfig& cfg) {
  cfg.validate();
  const std::size_t n = x0.size();
  MinimizeResult result;
  result.x = std::move(x0);
  if (!all_finite(result.x)) throw InvalidArgument("initial point is not finite");

  std::vector<double> g(n);
  double f = fg(result.x, g);
  result.function_evals = 1;
  if (!std::isfinite(f) || !all_finite(g)) {
    throw InvalidArgument("objective or gradient is not finite at the initial point");
  }

  CurvatureHistory history(static_cast<std::size_t>(cfg.history_size));
  auto first_step = [&] { return cfg.initial_step * std::min(1.0, 1.0 / l1_norm(g)); };

  for (int iter = 1; iter <= cfg.max_iterations; ++iter) {
    result.iterations = iter;
    if (max_abs(g) == 0.0) {
      result.converged_by_tol = true;
      break;
    }

    std::vector<double> p = history.direction(g);
    if (!(dot(g, p) < 0.0)) {
      history.clear();
      p = history.direction(g);
    }
    double t0 = history.size() == 0 ? first_step() : cfg.initial_step;
    LineSearchResult ls = strong_wolfe_line_search(fg, result.x, f, g, p, t0, cfg);
    result.function_evals += ls.evals;

    if (!ls.satisfied) {
      ++result.line_search_fallbacks;
      bool accepted = ls.value < f;
      if (!accepted && history.size() > 0) {
        history.clear();
        p = history.direction(g);
        ls = strong_wolfe_line_search(fg, result.x, f, g, p, first_step(), cfg);
        result.function_evals += ls.evals;
        accepted = ls.value < f;
      }
      if (!accepted) {
        const double step = 1e-4 / kernels::norm(p);
        std::vector<double> x_try = result.x;
        kernels::axpy(step, p, x_try);
        std::vector<double> g_try(n);
        const double f_try = fg(x_try, g_try);
        ++result.function_evals;
        if (!(f_try < f)) {
          result.line_search_failed = true;
          break;
        }
        ls.step = step;
        ls.value = f_try;
        ls.x = std::move(x_try);
        ls.grad = std::move(g_try);
      }
    }

    std::vector<double> s(n), y(n);
    for (std::size_t i = 0; i < n; ++i) {
      s[i] = ls.x[i] - result.x[i];
      y[i] = ls.grad[i] - g[i];
    }
    const double step_norm = kernels::norm(s);
    history.push(std::move(s), std::move(y));
    result.x = std::move(ls.x);
    g = std::move(ls.grad);
    f = ls.value;
    if (step_norm < cfg.update_norm_tol) {
      result.converged_by_tol = true;
      break;
    }
  }
  result.final_value = f;
  return result;
}

}  // namespace incdsi
