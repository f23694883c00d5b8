#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

#include "incdsi/incremental.hpp"
#include "incdsi/metrics.hpp"

namespace incdsi {

/// Metrics after `docs_added` stream documents. New-document metrics are NaN
/// when no eligible new-document query exists yet.
struct StreamCheckpointRow {
  std::size_t docs_added = 0;
  double hits1_orig = 0.0;
  double hits5_orig = 0.0;
  double hits10_orig = 0.0;
  double mrr10_orig = 0.0;
  double hits1_new = 0.0;
  double hits5_new = 0.0;
  double hits10_new = 0.0;
  double mrr10_new = 0.0;
  double cumulative_add_seconds = 0.0;
  double feasible_fraction = 0.0;
};

struct StreamResult {
  std::vector<StreamCheckpointRow> rows;
  std::vector<AddReport> reports;
};

/// Queries whose gold document is currently indexed.
QuerySet indexed_queries(const IndexView& index, const QuerySet& queries);

/// Evaluates one checkpoint: original-document metrics over queries with gold
/// row < n0, new-document metrics over queries whose gold was added so far.
StreamCheckpointRow checkpoint_metrics(const IndexView& index, const QuerySet& val_queries,
                                       std::size_t docs_added, double cumulative_add_seconds,
                                       double feasible_fraction);

using CheckpointHook = std::function<void(const StreamCheckpointRow&, const IndexState&)>;

/// Adds every document of `docs` one at a time and records a row whenever the
/// number added reaches the next checkpoint. Checkpoints must be strictly
/// increasing, positive and at most docs.size().
StreamResult run_stream(IndexState& state, std::span<const PendingDocument> docs,
                        std::span<const std::size_t> checkpoints, const AddOptions& options,
                        const QuerySet& val_queries, const CheckpointHook& on_checkpoint = {});

/// Header plus one row per checkpoint; NaN metrics are written as empty fields.
void write_stream_csv(std::ostream& out, std::span<const StreamCheckpointRow> rows);

}  // namespace incdsi
