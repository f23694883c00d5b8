#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "incdsi/index.hpp"
#include "incdsi/matrix.hpp"

namespace incdsi {

struct Hit {
  std::size_t row;
  std::string doc_id;
  double score;
};

/// Ranked retrieval output: scores non-increasing, ties by ascending row.
struct RankedResult {
  std::vector<Hit> entries;

  /// 1-based rank of `doc_id`, or nullopt when it is not in the list.
  std::optional<std::size_t> rank_of(const std::string& doc_id) const;
};

/// Exact maximum-inner-product search. Throws InvalidArgument unless
/// 1 <= k <= index.size() and ShapeError on a dimension mismatch.
RankedResult top_k(const IndexView& index, std::span<const float> query, std::size_t k);

/// Fraction of queries whose gold document is among the first k results.
double hits_at_k(std::span<const std::string> golds, std::span<const RankedResult> results,
                 std::size_t k);
/// Mean of 1/rank over queries; a gold outside the first k contributes 0.
double mrr_at_k(std::span<const std::string> golds, std::span<const RankedResult> results,
                std::size_t k = 10);

/// Weighted harmonic mean (1 + b^2) t o / (b^2 t + o); larger beta favours y_orig.
/// Defined as 0 when both inputs are 0.
double f_beta_target(double y_tune, double y_orig, double beta);

/// Query embeddings (one per row) with the doc id each should retrieve.
struct QuerySet {
  Matrix embeddings;
  std::vector<std::string> golds;

  std::size_t size() const noexcept { return golds.size(); }
};

struct SplitMetrics {
  double hits1 = 0.0;
  double hits5 = 0.0;
  double hits10 = 0.0;
  double mrr10 = 0.0;
};

/// Metrics over queries whose gold is an original document (row < n0) and
/// over queries whose gold was added later. A partition with no queries has
/// no metrics.
struct MetricsReport {
  std::optional<SplitMetrics> original;
  std::optional<SplitMetrics> added;
  std::size_t n_orig_queries = 0;
  std::size_t n_new_queries = 0;
};

/// Throws NotFoundError when a gold id is not indexed.
MetricsReport evaluate_split(const IndexView& index, const QuerySet& queries);
/// Convenience overload resolving golds through the state's id table.
MetricsReport evaluate_split(const IndexState& state, const QuerySet& queries);

/// MRR@10 over all queries, regardless of partition.
double mrr10(const IndexState& state, const QuerySet& queries);

}  // namespace incdsi
