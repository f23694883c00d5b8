#pragma once

#include <cstddef>
#include <cstdint>
#include <string>

#include "incdsi/index.hpp"
#include "incdsi/synthetic.hpp"

namespace incdsi {

/// How document vectors of the initial index are obtained.
///  - class_mean:  v_j is the mean of doc j's train queries (nearest-centroid retrieval).
///  - linear_head: V is a softmax classifier over doc ids trained with cross-entropy.
/// In both modes Z holds the per-doc mean train query.
enum class BootstrapMode { class_mean, linear_head };

std::string to_string(BootstrapMode mode);
BootstrapMode parse_bootstrap_mode(const std::string& name);

struct LinearHeadConfig {
  int epochs = 500;
  double learning_rate = 0.1;
  /// 0 means full-batch gradient descent.
  std::size_t batch_size = 0;
  /// Stop after this many epochs without a gain in train top-1 accuracy,
  /// or as soon as every train query is ranked first.
  int patience = 50;
  std::uint64_t seed = 0;

  /// Mini-batch settings for GPU-scale corpora (lr 1e-5, batch 128, 20 epochs).
  static LinearHeadConfig large_corpus();
};

struct BootstrapStats {
  int epochs_run = 0;
  double train_top1 = 0.0;
};

/// Builds the initial index from the train queries of `docs`. Throws
/// InvalidArgument when a document has no train query.
IndexState bootstrap_initial_index(const DocSet& docs, BootstrapMode mode,
                                   const LinearHeadConfig& cfg = {},
                                   BootstrapStats* stats = nullptr);

}  // namespace incdsi
