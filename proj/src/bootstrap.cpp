#include "incdsi/bootstrap.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <unordered_map>

#include "incdsi/errors.hpp"
#include "incdsi/kernels.hpp"

namespace incdsi {

namespace {

struct TrainingData {
  std::vector<std::vector<double>> queries;
  std::vector<std::size_t> labels;
};

/// Fraction of queries whose highest-scoring row (lowest row on ties) is their label.
double top1_accuracy(const TrainingData& data, const std::vector<std::vector<double>>& v) {
  std::size_t correct = 0;
  for (std::size_t i = 0; i < data.queries.size(); ++i) {
    std::size_t best = 0;
    double best_score = -INFINITY;
    for (std::size_t j = 0; j < v.size(); ++j) {
      const double s = kernels::dot(data.queries[i], v[j]);
      if (s > best_score) {
        best_score = s;
        best = j;
      }
    }
    correct += best == data.labels[i] ? 1 : 0;
  }
  return data.queries.empty() ? 0.0
                              : static_cast<double>(correct) / static_cast<double>(data.queries.size());
}

/// Softmax cross-entropy over doc rows, trained by (mini-)batch gradient descent.
std::vector<std::vector<double>> train_linear_head(const TrainingData& data, std::size_t rows,
                                                   std::size_t dim, const LinearHeadConfig& cfg,
                                                   BootstrapStats& stats) {
  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> normal(0.0, 1.0 / std::sqrt(static_cast<double>(dim)));
  std::vector<std::vector<double>> v(rows, std::vector<double>(dim));
  for (auto& row : v) {
    for (double& x : row) x = static_cast<double>(static_cast<float>(normal(rng)));
  }

  const std::size_t n = data.queries.size();
  const std::size_t batch = cfg.batch_size == 0 ? n : std::min(cfg.batch_size, n);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::vector<std::vector<double>> grad(rows, std::vector<double>(dim));
  std::vector<double> logits(rows);

  double best_acc = -1.0;
  int stale = 0;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    if (cfg.batch_size != 0) std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t start = 0; start < n; start += batch) {
      const std::size_t end = std::min(n, start + batch);
      for (auto& g : grad) std::fill(g.begin(), g.end(), 0.0);
      for (std::size_t b = start; b < end; ++b) {
        const std::size_t i = order[b];
        const auto& q = data.queries[i];
        double max_logit = -INFINITY;
        for (std::size_t j = 0; j < rows; ++j) {
          logits[j] = kernels::dot(q, v[j]);
          max_logit = std::max(max_logit, logits[j]);
        }
        double z = 0.0;
        for (double& l : logits) {
          l = std::exp(l - max_logit);
          z += l;
        }
        for (std::size_t j = 0; j < rows; ++j) {
          const double coeff = logits[j] / z - (j == data.labels[i] ? 1.0 : 0.0);
          if (coeff != 0.0) kernels::axpy(coeff, q, grad[j]);
        }
      }
      const double scale = -cfg.learning_rate / static_cast<double>(end - start);
      for (std::size_t j = 0; j < rows; ++j) kernels::axpy(scale, grad[j], v[j]);
    }
    ++stats.epochs_run;

    const double acc = top1_accuracy(data, v);
    if (acc >= 1.0) break;
    if (acc > best_acc) {
      best_acc = acc;
      stale = 0;
    } else if (++stale >= cfg.patience) {
      break;
    }
  }
  stats.train_top1 = top1_accuracy(data, v);
  return v;
}

}  // namespace

std::string to_string(BootstrapMode mode) {
  return mode == BootstrapMode::class_mean ? "class_mean" : "linear_head";
}

BootstrapMode parse_bootstrap_mode(const std::string& name) {
  if (name == "class_mean") return BootstrapMode::class_mean;
  if (name == "linear_head") return BootstrapMode::linear_head;
  throw InvalidArgument("unknown bootstrap mode: " + name);
}

LinearHeadConfig LinearHeadConfig::large_corpus() {
  LinearHeadConfig cfg;
  cfg.epochs = 20;
  cfg.learning_rate = 1e-5;
  cfg.batch_size = 128;
  return cfg;
}

IndexState bootstrap_initial_index(const DocSet& docs, BootstrapMode mode,
                                   const LinearHeadConfig& cfg, BootstrapStats* stats) {
  const std::size_t dim = docs.queries.cols();
  const std::vector<PendingDocument> grouped = docs.train_documents();
  Matrix rep_queries(0, dim);
  std::vector<std::string> ids;
  TrainingData data;
  for (std::size_t j = 0; j < grouped.size(); ++j) {
    const auto& doc = grouped[j];
    if (doc.queries.rows() == 0) {
      throw InvalidArgument("document " + doc.doc_id + " has no train queries");
    }
    rep_queries.push_row(representative_query(doc.queries));
    ids.push_back(doc.doc_id);
    for (std::size_t i = 0; i < doc.queries.rows(); ++i) {
      const auto q = doc.queries.row(i);
      data.queries.emplace_back(q.begin(), q.end());
      data.labels.push_back(j);
    }
  }

  BootstrapStats local;
  BootstrapStats& st = stats ? *stats : local;
  st = BootstrapStats{};
  if (mode == BootstrapMode::class_mean) {
    IndexState state(rep_queries, rep_queries, std::move(ids));
    std::vector<std::vector<double>> v;
    for (std::size_t j = 0; j < rep_queries.rows(); ++j) {
      const auto r = rep_queries.row(j);
      v.emplace_back(r.begin(), r.end());
    }
    st.train_top1 = top1_accuracy(data, v);
    return state;
  }

  const auto v = train_linear_head(data, grouped.size(), dim, cfg, st);
  Matrix doc_vectors(0, dim);
  std::vector<float> row(dim);
  for (const auto& vj : v) {
    std::transform(vj.begin(), vj.end(), row.begin(), [](double x) { return static_cast<float>(x); });
    doc_vectors.push_row(row);
  }
  return IndexState(doc_vectors, rep_queries, std::move(ids));
}

}  // namespace incdsi
