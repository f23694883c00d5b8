#include "incdsi/stream.hpp"

#include <cmath>
#include <limits>
#include <ostream>
#include <unordered_set>

#include "incdsi/errors.hpp"

namespace incdsi {

QuerySet indexed_queries(const IndexView& index, const QuerySet& queries) {
  std::unordered_set<std::string> present;
  present.reserve(index.size());
  for (std::size_t r = 0; r < index.size(); ++r) present.insert(index.doc_id(r));
  QuerySet out;
  out.embeddings = Matrix(0, queries.embeddings.cols());
  for (std::size_t q = 0; q < queries.size(); ++q) {
    if (!present.contains(queries.golds[q])) continue;
    out.embeddings.push_row(queries.embeddings.row(q));
    out.golds.push_back(queries.golds[q]);
  }
  return out;
}

StreamCheckpointRow checkpoint_metrics(const IndexView& index, const QuerySet& val_queries,
                                       std::size_t docs_added, double cumulative_add_seconds,
                                       double feasible_fraction) {
  const MetricsReport m = evaluate_split(index, indexed_queries(index, val_queries));
  constexpr double nan = std::numeric_limits<double>::quiet_NaN();
  const SplitMetrics none{nan, nan, nan, nan};
  const SplitMetrics orig = m.original.value_or(none);
  const SplitMetrics added = m.added.value_or(none);
  StreamCheckpointRow row;
  row.docs_added = docs_added;
  row.hits1_orig = orig.hits1;
  row.hits5_orig = orig.hits5;
  row.hits10_orig = orig.hits10;
  row.mrr10_orig = orig.mrr10;
  row.hits1_new = added.hits1;
  row.hits5_new = added.hits5;
  row.hits10_new = added.hits10;
  row.mrr10_new = added.mrr10;
  row.cumulative_add_seconds = cumulative_add_seconds;
  row.feasible_fraction = feasible_fraction;
  return row;
}

StreamResult run_stream(IndexState& state, std::span<const PendingDocument> docs,
                        std::span<const std::size_t> checkpoints, const AddOptions& options,
                        const QuerySet& val_queries, const CheckpointHook& on_checkpoint) {
  for (std::size_t i = 0; i < checkpoints.size(); ++i) {
    if (checkpoints[i] == 0 || checkpoints[i] > docs.size() ||
        (i > 0 && checkpoints[i] <= checkpoints[i - 1])) {
      throw InvalidArgument("checkpoints must be strictly increasing values in [1, " +
                            std::to_string(docs.size()) + "]");
    }
  }
  StreamResult result;
  result.reports.reserve(docs.size());
  double seconds = 0.0;
  std::size_t feasible = 0;
  std::size_t next = 0;
  for (std::size_t i = 0; i < docs.size(); ++i) {
    auto reports = add_stream(state, docs.subspan(i, 1), options);
    seconds += reports.front().wall_millis / 1000.0;
    feasible += reports.front().feasible ? 1 : 0;
    result.reports.push_back(std::move(reports.front()));

    const std::size_t added = i + 1;
    if (next < checkpoints.size() && checkpoints[next] == added) {
      const double fraction = static_cast<double>(feasible) / static_cast<double>(added);
      result.rows.push_back(checkpoint_metrics(state.view(), val_queries, added, seconds, fraction));
      if (on_checkpoint) on_checkpoint(result.rows.back(), state);
      ++next;
    }
  }
  return result;
}

void write_stream_csv(std::ostream& out, std::span<const StreamCheckpointRow> rows) {
  out << "docs_added,hits1_orig,hits5_orig,hits10_orig,mrr10_orig,hits1_new,hits5_new,"
         "hits10_new,mrr10_new,cumulative_add_seconds,feasible_fraction\n";
  const auto old_precision = out.precision(std::numeric_limits<double>::max_digits10);
  auto field = [&out](double x) {
    out << ',';
    if (!std::isnan(x)) out << x;
  };
  for (const auto& r : rows) {
    out << r.docs_added;
    field(r.hits1_orig);
    field(r.hits5_orig);
    field(r.hits10_orig);
    field(r.mrr10_orig);
    field(r.hits1_new);
    field(r.hits5_new);
    field(r.hits10_new);
    field(r.mrr10_new);
    field(r.cumulative_add_seconds);
    field(r.feasible_fraction);
    out << '\n';
  }
  out.precision(old_precision);
}

}  // namespace incdsi
