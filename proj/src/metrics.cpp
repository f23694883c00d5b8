#include "incdsi/metrics.hpp"

#include <algorithm>
#include <unordered_map>

#include "incdsi/errors.hpp"
#include "incdsi/kernels.hpp"

namespace incdsi {

namespace {

struct Scored {
  double score;
  std::size_t row;
};

/// Strict ranking order: higher score first, then lower row.
bool ranks_before(const Scored& a, const Scored& b) {
  return a.score > b.score || (a.score == b.score && a.row < b.row);
}

void check_lists(std::span<const std::string> golds, std::span<const RankedResult> results) {
  if (golds.size() != results.size()) {
    throw InvalidArgument("gold list and result list differ in length");
  }
  if (golds.empty()) throw InvalidArgument("metrics need at least one query");
}

}  // namespace

std::optional<std::size_t> RankedResult::rank_of(const std::string& doc_id) const {
  for (std::size_t i = 0; i < entries.size(); ++i) {
    if (entries[i].doc_id == doc_id) return i + 1;
  }
  return std::nullopt;
}

RankedResult top_k(const IndexView& index, std::span<const float> query, std::size_t k) {
  if (k < 1 || k > index.size()) {
    throw InvalidArgument("k=" + std::to_string(k) + " outside [1, " +
                          std::to_string(index.size()) + "]");
  }
  if (query.size() != index.dim()) {
    throw ShapeError("query has dimension " + std::to_string(query.size()) + ", index has " +
                     std::to_string(index.dim()));
  }
  // Heap ordered so that the front is the weakest kept entry.
  std::vector<Scored> heap;
  heap.reserve(k + 1);
  index.for_each_span([&](const RowSpan& span) {
    for (std::size_t i = 0; i < span.count; ++i) {
      const Scored cand{kernels::dot(query, span.doc_vector(i)), span.first_row + i};
      if (heap.size() < k) {
        heap.push_back(cand);
        std::push_heap(heap.begin(), heap.end(), ranks_before);
      } else if (ranks_before(cand, heap.front())) {
        std::pop_heap(heap.begin(), heap.end(), ranks_before);
        heap.back() = cand;
        std::push_heap(heap.begin(), heap.end(), ranks_before);
      }
    }
  });
  std::sort(heap.begin(), heap.end(), ranks_before);
  RankedResult out;
  out.entries.reserve(heap.size());
  for (const auto& s : heap) out.entries.push_back(Hit{s.row, index.doc_id(s.row), s.score});
  return out;
}

double hits_at_k(std::span<const std::string> golds, std::span<const RankedResult> results,
                 std::size_t k) {
  check_lists(golds, results);
  std::size_t hits = 0;
  for (std::size_t q = 0; q < golds.size(); ++q) {
    const auto rank = results[q].rank_of(golds[q]);
    if (rank && *rank <= k) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(golds.size());
}

double mrr_at_k(std::span<const std::string> golds, std::span<const RankedResult> results,
                std::size_t k) {
  check_lists(golds, results);
  double sum = 0.0;
  for (std::size_t q = 0; q < golds.size(); ++q) {
    const auto rank = results[q].rank_of(golds[q]);
    if (rank && *rank <= k) sum += 1.0 / static_cast<double>(*rank);
  }
  return sum / static_cast<double>(golds.size());
}

double f_beta_target(double y_tune, double y_orig, double beta) {
  if (!(beta > 0.0)) throw InvalidArgument("beta must be > 0");
  if (y_tune == 0.0 && y_orig == 0.0) return 0.0;
  const double b2 = beta * beta;
  return (1.0 + b2) * (y_tune * y_orig) / (b2 * y_tune + y_orig);
}

MetricsReport evaluate_split(const IndexView& index, const QuerySet& queries) {
  if (queries.embeddings.rows() != queries.golds.size()) {
    throw ShapeError("query set has mismatched embeddings and golds");
  }
  std::unordered_map<std::string, std::size_t> rows_by_id;
  rows_by_id.reserve(index.size());
  for (std::size_t r = 0; r < index.size(); ++r) rows_by_id.emplace(index.doc_id(r), r);

  std::vector<std::string> golds[2];
  std::vector<RankedResult> results[2];
  const std::size_t k = std::min<std::size_t>(10, index.size());
  for (std::size_t q = 0; q < queries.size(); ++q) {
    const auto it = rows_by_id.find(queries.golds[q]);
    if (it == rows_by_id.end()) throw NotFoundError("gold doc id not indexed: " + queries.golds[q]);
    const int part = it->second < index.n0() ? 0 : 1;
    golds[part].push_back(queries.golds[q]);
    results[part].push_back(top_k(index, queries.embeddings.row(q), k));
  }

  auto summarize = [](const std::vector<std::string>& g,
                      const std::vector<RankedResult>& r) -> std::optional<SplitMetrics> {
    if (g.empty()) return std::nullopt;
    return SplitMetrics{hits_at_k(g, r, 1), hits_at_k(g, r, 5), hits_at_k(g, r, 10),
                        mrr_at_k(g, r, 10)};
  };
  MetricsReport report;
  report.original = summarize(golds[0], results[0]);
  report.added = summarize(golds[1], results[1]);
  report.n_orig_queries = golds[0].size();
  report.n_new_queries = golds[1].size();
  return report;
}

MetricsReport evaluate_split(const IndexState& state, const QuerySet& queries) {
  return evaluate_split(state.view(), queries);
}

double mrr10(const IndexState& state, const QuerySet& queries) {
  if (queries.size() == 0) return 0.0;
  const IndexView view = state.view();
  const std::size_t k = std::min<std::size_t>(10, view.size());
  std::vector<RankedResult> results;
  results.reserve(queries.size());
  for (std::size_t q = 0; q < queries.size(); ++q) {
    results.push_back(top_k(view, queries.embeddings.row(q), k));
  }
  return mrr_at_k(queries.golds, results, 10);
}

}  // namespace incdsi
