#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "incdsi/incremental.hpp"
#include "incdsi/io.hpp"
#include "incdsi/matrix.hpp"
#include "incdsi/metrics.hpp"

namespace incdsi {

/// Parameters of a clustered synthetic corpus. Each document gets a random
/// unit-norm center; its queries are center + N(0, cluster_std^2) noise,
/// renormalized to unit length.
struct SyntheticCorpusSpec {
  std::size_t n_docs = 100;
  std::size_t dim = 32;
  std::size_t queries_per_doc = 5;
  /// When larger than queries_per_doc, each document draws its train-query
  /// count uniformly from [queries_per_doc, queries_per_doc_max].
  std::size_t queries_per_doc_max = 0;
  std::size_t val_per_doc = 1;
  std::size_t test_per_doc = 1;
  double cluster_std = 0.1;
  double initial_fraction = 0.90;
  double new_fraction = 0.09;
  double tune_fraction = 0.01;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Queries for one group of documents, plus the manifest describing them.
struct DocSet {
  std::vector<std::string> doc_ids;  // arrival order
  Matrix queries;
  std::vector<io::QueryRecord> manifest;
  /// Cluster centers, one row per doc (synthetic corpora only; empty when read from disk).
  Matrix centers;

  /// Train queries grouped per document, in arrival order.
  std::vector<PendingDocument> train_documents() const;
  /// Queries of one split with their gold doc ids.
  QuerySet query_set(io::QuerySplit split) const;
};

struct SyntheticCorpus {
  DocSet initial;  // indexed up front
  DocSet added;    // arrives as a stream
  DocSet tuning;   // held out for hyperparameter search
};

SyntheticCorpus generate_synthetic(const SyntheticCorpusSpec& spec);

/// Writes initial.{idsi,tsv}, new.{idsi,tsv} and tune.{idsi,tsv} into `dir`.
void write_corpus(const SyntheticCorpus& corpus, const std::filesystem::path& dir);
SyntheticCorpus read_corpus(const std::filesystem::path& dir);
DocSet read_doc_set(const std::filesystem::path& embeddings, const std::filesystem::path& manifest);

}  // namespace incdsi
