// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
// exits non-zero when any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "incdsi/bootstrap.hpp"
#include "incdsi/incremental.hpp"
#include "incdsi/io.hpp"
#include "incdsi/metrics.hpp"
#include "incdsi/stream.hpp"
#include "incdsi/synthetic.hpp"
#include "incdsi/tuner.hpp"
#include "support/gradient_check.hpp"
#include "support/random.hpp"

namespace incdsi {
namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

// ---------------------------------------------------------------- 1

Outcome gradient_check() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(2024);
  int checked = 0, bad = 0;
  double worst = 0.0;
  for (int inst = 0; inst < 100; ++inst) {
    const auto variant = inst % 2 ? LossVariant::hinge : LossVariant::squared_hinge;
    const auto s = testing::random_index(200, 32, 10'000 + inst);
    const auto q = testing::random_matrix(1, 32, 20'000 + inst);
    const Hyperparams hp = sample_config(rng, SearchSpace{}, variant);
    const ObjectiveContext ctx(s.view(), {q.row(0).begin(), q.row(0).end()}, hp);
    const auto v = testing::non_kink_point(ctx, 30'000 + inst, 1.0, 1e-4, 200);
    if (!v) continue;
    ++checked;
    const double err = testing::fd_relative_error(ctx, *v, 1e-4);
    worst = std::max(worst, err);
    if (!(err < 1e-5)) ++bad;
  }
  const double secs = seconds_since(t0);
  return {checked == 100 && bad == 0 && secs < 10.0,
          fmt("%d instances, worst rel err %.2e, %.2fs", checked, worst, secs)};
}

// ---------------------------------------------------------------- 2

bool brute_force_feasible(const IndexState& s, std::size_t row) {
  const auto v = s.doc_vector(row);
  const auto q = s.rep_query(row);
  long double best = -INFINITY;
  for (std::size_t j = 0; j < row; ++j) best = std::max(best, testing::naive_dot(q, s.doc_vector(j)));
  if (row > 0 && !(testing::naive_dot(q, v) > best)) return false;
  for (std::size_t j = 0; j < row; ++j) {
    const auto z = s.rep_query(j);
    if (!(testing::naive_dot(z, v) < testing::naive_dot(z, s.doc_vector(j)))) return false;
  }
  return true;
}

Outcome feasibility_soundness() {
  SyntheticCorpusSpec spec;
  spec.n_docs = 1100;
  spec.dim = 32;
  spec.queries_per_doc = 3;
  spec.initial_fraction = 100.0 / 1100.0;
  spec.new_fraction = 1.0 - spec.initial_fraction;
  spec.tune_fraction = 0.0;
  spec.seed = 5;
  const auto corpus = generate_synthetic(spec);
  IndexState s = bootstrap_initial_index(corpus.initial, BootstrapMode::class_mean);
  const auto docs = corpus.added.train_documents();
  AddOptions o;
  o.hp.gamma1 = o.hp.gamma2 = 0.2;
  o.seed = 11;
  const auto reports = add_stream(s, docs, o);
  int claimed = 0, violated = 0;
  for (const auto& r : reports) {
    if (!r.feasible) continue;
    ++claimed;
    if (!brute_force_feasible(s, r.row)) ++violated;
  }
  return {reports.size() >= 1000 && violated == 0,
          fmt("%zu adds, %d reported feasible, %d violations", reports.size(), claimed, violated)};
}

// ---------------------------------------------------------------- 3, 5, 6

struct Benchmark {
  StreamCheckpointRow pre;
  StreamCheckpointRow squared;
  StreamCheckpointRow hinge;
  std::vector<AddReport> squared_reports;
  std::vector<AddReport> hinge_reports;
  Hyperparams tuned;
  double seconds = 0.0;
};

const Benchmark& benchmark() {
  static const Benchmark b = [] {
    const auto t0 = Clock::now();
    SyntheticCorpusSpec spec;
    spec.n_docs = 2000;
    spec.dim = 64;
    spec.queries_per_doc = 5;
    spec.cluster_std = 0.15;
    spec.seed = 0;
    const auto corpus = generate_synthetic(spec);
    const IndexState base = bootstrap_initial_index(corpus.initial, BootstrapMode::class_mean);
    const QuerySet val_orig = corpus.initial.query_set(io::QuerySplit::val);

    TuneOptions to;
    to.trials = 20;
    to.beta = 5.0;
    to.seed = spec.seed;
    const auto tuned = tune(base, corpus.tuning.train_documents(), val_orig,
                            corpus.tuning.query_set(io::QuerySplit::val), to);

    QuerySet val = val_orig;
    const QuerySet val_new = corpus.added.query_set(io::QuerySplit::val);
    for (std::size_t i = 0; i < val_new.size(); ++i) {
      val.embeddings.push_row(val_new.embeddings.row(i));
      val.golds.push_back(val_new.golds[i]);
    }
    const auto docs = corpus.added.train_documents();
    const std::vector<std::size_t> checkpoints{docs.size()};

    Benchmark out;
    out.tuned = tuned.best;
    out.pre = checkpoint_metrics(base.view(), val, 0, 0.0, 0.0);
    for (auto variant : {LossVariant::squared_hinge, LossVariant::hinge}) {
      IndexState s = base;
      AddOptions o;
      o.hp = tuned.best;
      o.hp.loss_variant = variant;
      o.seed = spec.seed;
      auto r = run_stream(s, docs, checkpoints, o, val);
      if (variant == LossVariant::squared_hinge) {
        out.squared = r.rows.back();
        out.squared_reports = std::move(r.reports);
      } else {
        out.hinge = r.rows.back();
        out.hinge_reports = std::move(r.reports);
      }
    }
    out.seconds = seconds_since(t0);
    return out;
  }();
  return b;
}

Outcome streaming_benchmark() {
  const auto& b = benchmark();
  const auto& row = b.squared;
  const double d1 = b.pre.hits1_orig - row.hits1_orig;
  const double d10 = b.pre.hits10_orig - row.hits10_orig;
  const bool a = row.feasible_fraction >= 0.99;
  const bool nb = row.hits1_new >= 0.90;
  const bool c = d1 <= 0.02;
  const bool d = d10 <= 0.01;
  return {a && nb && c && d && b.seconds < 300.0,
          fmt("ff %.3f%s, new H@1 %.3f%s, orig H@1 %.4f->%.4f%s, orig H@10 %.4f->%.4f%s, "
              "tuned l1=%.3f g1=%.2f g2=%.2f, %.1fs",
              row.feasible_fraction, a ? "" : " [a]", row.hits1_new, nb ? "" : " [b]",
              b.pre.hits1_orig, row.hits1_orig, c ? "" : " [c]", b.pre.hits10_orig,
              row.hits10_orig, d ? "" : " [d]", b.tuned.lambda1, b.tuned.gamma1, b.tuned.gamma2,
              b.seconds)};
}

int median_iterations(const std::vector<AddReport>& reports) {
  std::vector<int> it;
  for (const auto& r : reports) it.push_back(r.iterations);
  std::sort(it.begin(), it.end());
  return it[it.size() / 2];
}

Outcome convergence_budget() {
  const auto& reports = benchmark().squared_reports;
  std::size_t ok = 0;
  for (const auto& r : reports) ok += r.converged_by_tol && r.iterations <= 30;
  const double frac = static_cast<double>(ok) / static_cast<double>(reports.size());
  return {frac >= 0.95, fmt("%zu/%zu adds stopped on the update norm (%.3f)", ok, reports.size(), frac)};
}

Outcome variant_parity() {
  const auto& b = benchmark();
  const int ms = median_iterations(b.squared_reports), mh = median_iterations(b.hinge_reports);
  return {b.squared.feasible_fraction >= 0.99 && b.hinge.feasible_fraction >= 0.99 && ms <= mh,
          fmt("ff squared %.3f hinge %.3f, median iterations squared %d hinge %d",
              b.squared.feasible_fraction, b.hinge.feasible_fraction, ms, mh)};
}

// ---------------------------------------------------------------- 4

Outcome add_latency() {
  auto median_add_ms = [](std::size_t m, std::size_t h) {
    std::mt19937_64 rng(m);
    std::normal_distribution<double> normal(0.0, 1.0);
    auto unit_rows = [&](std::size_t n) {
      Matrix out(n, h);
      for (std::size_t i = 0; i < n; ++i) {
        double ss = 0;
        for (std::size_t j = 0; j < h; ++j) {
          out(i, j) = static_cast<float>(normal(rng));
          ss += static_cast<double>(out(i, j)) * out(i, j);
        }
        const float inv = static_cast<float>(1.0 / std::sqrt(ss));
        for (std::size_t j = 0; j < h; ++j) out(i, j) *= inv;
      }
      return out;
    };
    const Matrix z = unit_rows(m);
    IndexState s(z, z, testing::sequential_ids(m));
    AddOptions o;
    o.hp.gamma1 = o.hp.gamma2 = 0.1;
    std::vector<double> ms;
    for (int k = 0; k < 7; ++k) {
      ms.push_back(add_document(s, "new" + std::to_string(k), unit_rows(3), o).wall_millis);
    }
    std::sort(ms.begin(), ms.end());
    return ms[ms.size() / 2];
  };
  const double m100 = median_add_ms(100'000, 768);
  const double m200 = median_add_ms(200'000, 768);
  const double ratio = m200 / m100;
  return {m100 < 500.0 && ratio <= 2.5,
          fmt("median %.1f ms at m=100000, %.1f ms at m=200000, ratio %.2f", m100, m200, ratio)};
}

// ---------------------------------------------------------------- 7

Outcome retrieval_oracle() {
  // Small integer entries make every score exact, so ties are real ties.
  std::mt19937_64 rng(77);
  std::uniform_int_distribution<int> small(-2, 2);
  Matrix docs(5000, 64);
  for (std::size_t r = 0; r < 4000; ++r)
    for (std::size_t c = 0; c < 64; ++c) docs(r, c) = static_cast<float>(small(rng));
  std::uniform_int_distribution<std::size_t> pick(0, 3999);
  for (std::size_t r = 4000; r < 5000; ++r) {
    const std::size_t src = pick(rng);
    for (std::size_t c = 0; c < 64; ++c) docs(r, c) = docs(src, c);
  }
  const IndexState s(docs, docs, testing::sequential_ids(5000));
  std::vector<std::size_t> order(5000);
  std::vector<long double> scores(5000);
  int mismatches = 0, with_ties = 0;
  for (int qi = 0; qi < 1000; ++qi) {
    std::vector<float> q(64);
    for (float& x : q) x = static_cast<float>(small(rng));
    for (std::size_t r = 0; r < 5000; ++r) scores[r] = testing::naive_dot(q, s.doc_vector(r));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
    const std::size_t k = qi % 3 == 0 ? 1 : (qi % 3 == 1 ? 10 : 100);
    const auto got = top_k(s.view(), q, k);
    bool tie = false;
    for (std::size_t i = 0; i + 1 < k + 1; ++i) tie = tie || scores[order[i]] == scores[order[i + 1]];
    with_ties += tie;
    bool same = got.entries.size() == k;
    for (std::size_t i = 0; same && i < k; ++i) {
      same = got.entries[i].row == order[i] &&
             got.entries[i].score == static_cast<double>(scores[order[i]]);
    }
    mismatches += !same;
  }
  return {mismatches == 0 && with_ties > 0,
          fmt("1000 queries, %d mismatches, %d with ties in the top k", mismatches, with_ties)};
}

// ---------------------------------------------------------------- 8

RankedResult ranked(std::initializer_list<const char*> ids) {
  RankedResult r;
  std::size_t row = 0;
  for (const char* id : ids) r.entries.push_back({row++, id, 0.0});
  return r;
}

Outcome metric_suite() {
  const std::vector<std::string> golds{"a", "b", "c", "d"};
  const std::vector<RankedResult> results{
      ranked({"a", "x", "y"}),
      ranked({"x", "y", "b"}),
      ranked({"x1", "x2", "x3", "x4", "x5", "x6", "x7", "x8", "x9", "x10", "c"}),
      ranked({"x", "d"}),
  };
  std::vector<std::string> fails;
  auto near = [&](double got, double want, const char* what) {
    if (std::abs(got - want) > 1e-12) fails.push_back(fmt("%s=%.6f want %.6f", what, got, want));
  };
  near(hits_at_k(golds, results, 1), 0.25, "hits@1");
  near(hits_at_k(golds, results, 3), 0.75, "hits@3");
  near(hits_at_k(golds, results, 10), 0.75, "hits@10");
  near(mrr_at_k(golds, results, 10), (1.0 + 1.0 / 3 + 0.0 + 0.5) / 4, "mrr@10");
  near(f_beta_target(0.68, 0.75, 5.0), 13.26 / 17.75, "f5");
  near(f_beta_target(0.6, 0.6, 3.0), 0.6, "f_equal");

  bool monotone = true;
  for (auto [t, o] : {std::pair{0.3, 0.9}, std::pair{0.95, 0.4}}) {
    double prev = f_beta_target(t, o, 0.25);
    for (double beta : {0.5, 1.0, 2.0, 5.0, 10.0, 100.0}) {
      const double cur = f_beta_target(t, o, beta);
      monotone = monotone && std::abs(cur - o) <= std::abs(prev - o);
      prev = cur;
    }
  }
  if (!monotone) fails.push_back("beta monotonicity");
  std::string detail = "hits/mrr/f_beta hand values and beta monotonicity";
  for (const auto& f : fails) detail += "; " + f;
  return {fails.empty(), detail};
}

// ---------------------------------------------------------------- 9

bool same_report(const AddReport& a, const AddReport& b) {
  return a.doc_id == b.doc_id && a.row == b.row && a.feasible == b.feasible &&
         a.iterations == b.iterations && a.total_iterations == b.total_iterations &&
         a.restarts == b.restarts && a.converged_by_tol == b.converged_by_tol &&
         a.final_loss == b.final_loss && a.min_old_margin == b.min_old_margin &&
         a.new_margin == b.new_margin;
}

bool same_metrics(const StreamCheckpointRow& a, const StreamCheckpointRow& b) {
  auto eq = [](double x, double y) { return x == y || (std::isnan(x) && std::isnan(y)); };
  return a.docs_added == b.docs_added && eq(a.hits1_orig, b.hits1_orig) &&
         eq(a.hits5_orig, b.hits5_orig) && eq(a.hits10_orig, b.hits10_orig) &&
         eq(a.mrr10_orig, b.mrr10_orig) && eq(a.hits1_new, b.hits1_new) &&
         eq(a.hits5_new, b.hits5_new) && eq(a.hits10_new, b.hits10_new) &&
         eq(a.mrr10_new, b.mrr10_new) && eq(a.feasible_fraction, b.feasible_fraction);
}

Outcome persistence() {
  SyntheticCorpusSpec spec;
  spec.n_docs = 600;
  spec.dim = 24;
  spec.queries_per_doc = 4;
  spec.initial_fraction = 0.8;
  spec.new_fraction = 0.2;
  spec.tune_fraction = 0.0;
  spec.seed = 9;
  const auto corpus = generate_synthetic(spec);
  const IndexState base = bootstrap_initial_index(corpus.initial, BootstrapMode::class_mean);
  const auto docs = corpus.added.train_documents();
  QuerySet val = corpus.initial.query_set(io::QuerySplit::val);
  const QuerySet val_new = corpus.added.query_set(io::QuerySplit::val);
  for (std::size_t i = 0; i < val_new.size(); ++i) {
    val.embeddings.push_row(val_new.embeddings.row(i));
    val.golds.push_back(val_new.golds[i]);
  }
  AddOptions o;
  o.hp.gamma1 = 0.3;
  o.hp.gamma2 = 0.2;
  o.seed = 42;
  const std::size_t half = docs.size() / 2;

  IndexState full = base;
  const std::vector<std::size_t> cps{half, docs.size()};
  const auto whole = run_stream(full, docs, cps, o, val);

  IndexState first = base;
  const std::vector<std::size_t> cp_half{half};
  const auto part1 = run_stream(first, std::span(docs).first(half), cp_half, o, val);
  const auto path = std::filesystem::temp_directory_path() / "incdsi-acceptance.idss";
  io::save_snapshot(first, o.hp, path);
  const std::string bytes = io::read_file(path);
  auto [loaded, hp] = io::load_snapshot(path);
  std::filesystem::remove(path);
  const bool bit_exact = io::encode_snapshot(loaded, hp) == bytes &&
                         io::encode_snapshot(first, o.hp) == bytes;

  AddOptions o2 = o;
  o2.hp = hp;
  const std::vector<std::size_t> cp_rest{docs.size() - half};
  const auto part2 = run_stream(loaded, std::span(docs).subspan(half), cp_rest, o2, val);

  bool reports_match = whole.reports.size() == part1.reports.size() + part2.reports.size();
  for (std::size_t i = 0; reports_match && i < whole.reports.size(); ++i) {
    const auto& other = i < half ? part1.reports[i] : part2.reports[i - half];
    reports_match = same_report(whole.reports[i], other);
  }
  StreamCheckpointRow tail = part2.rows.back();
  tail.docs_added += half;
  const bool metrics_match = same_metrics(whole.rows.back(), tail) &&
                             same_metrics(whole.rows.front(), part1.rows.back());
  const bool final_match = io::encode_snapshot(full, o.hp) == io::encode_snapshot(loaded, hp);
  return {bit_exact && reports_match && metrics_match && final_match,
          fmt("round trip %s, %zu replayed reports %s, metrics %s, final index %s",
              bit_exact ? "exact" : "differs", whole.reports.size(),
              reports_match ? "match" : "differ", metrics_match ? "match" : "differ",
              final_match ? "identical" : "differs")};
}

// ---------------------------------------------------------------- 10

Outcome tuner_sanity() {
  SyntheticCorpusSpec spec;
  spec.n_docs = 2000;
  spec.dim = 32;
  spec.queries_per_doc = 4;
  spec.cluster_std = 0.1;
  spec.seed = 9;
  const auto corpus = generate_synthetic(spec);
  const IndexState base = bootstrap_initial_index(corpus.initial, BootstrapMode::class_mean);
  const auto docs = corpus.added.train_documents();
  const QuerySet val = corpus.initial.query_set(io::QuerySplit::val);
  const std::vector<std::size_t> cps{docs.size()};

  auto stream_ff = [&](const Hyperparams& hp) {
    IndexState s = base;
    AddOptions o;
    o.hp = hp;
    return run_stream(s, docs, cps, o, val).rows.back().feasible_fraction;
  };
  Hyperparams big, moderate;
  big.gamma1 = big.gamma2 = 9.0;
  moderate.gamma1 = moderate.gamma2 = 1.0;
  const double ff_big = stream_ff(big), ff_moderate = stream_ff(moderate);

  TuneOptions to;
  to.trials = 50;
  to.seed = 9;
  const auto tuned = tune(base, corpus.tuning.train_documents(), val,
                          corpus.tuning.query_set(io::QuerySplit::val), to);
  double worst = INFINITY;
  for (const auto& t : tuned.trials) worst = std::min(worst, t.y_target);
  const double best = tuned.trials[tuned.best_trial].y_target;
  const double ff = stream_ff(tuned.best);
  const bool constructed = ff_big < 0.5 && ff_moderate >= 0.99;
  return {constructed && ff >= 0.99 && best > worst,
          fmt("ff at gamma 9 %.3f, at gamma 1 %.3f; tuned g1=%.2f g2=%.2f ff %.3f, "
              "y_target %.4f vs worst %.4f",
              ff_big, ff_moderate, tuned.best.gamma1, tuned.best.gamma2, ff, best, worst)};
}

}  // namespace
}  // namespace incdsi

int main() {
  using namespace incdsi;
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"gradient matches finite differences", gradient_check},
      {"reported feasibility holds under brute force", feasibility_soundness},
      {"synthetic streaming benchmark", streaming_benchmark},
      {"per-add latency", add_latency},
      {"optimizer convergence budget", convergence_budget},
      {"loss-variant parity", variant_parity},
      {"top_k matches full sort", retrieval_oracle},
      {"metric suite", metric_suite},
      {"snapshot round trip and replay", persistence},
      {"tuner sanity", tuner_sanity},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome out;
    try {
      out = criteria[i].second();
    } catch (const std::exception& e) {
      out = {false, std::string("threw: ") + e.what()};
    }
    failed += !out.pass;
    std::printf("%s %zu %s: %s\n", out.pass ? "PASS" : "FAIL", i + 1, criteria[i].first,
                out.detail.c_str());
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
