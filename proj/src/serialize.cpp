#include "incdsi/serialize.hpp"

#include <initializer_list>
#include <string>

#include "incdsi/errors.hpp"
#include "incdsi/io.hpp"

namespace incdsi {

using nlohmann::json;

namespace {

void reject_unknown_keys(const json& j, std::initializer_list<const char*> known,
                         const char* what) {
  if (!j.is_object()) throw InvalidArgument(std::string(what) + " must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    bool ok = false;
    for (const char* k : known) ok = ok || key == k;
    if (!ok) throw InvalidArgument(std::string(what) + ": unknown key '" + key + "'");
  }
}

template <class T>
void read_key(const json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw InvalidArgument(std::string("bad value for '") + key + "': " + e.what());
  }
}

json metric_or_null(const std::optional<SplitMetrics>& m, double SplitMetrics::*field) {
  return m ? json((*m).*field) : json(nullptr);
}

}  // namespace

json to_json(const Hyperparams& hp) {
  return {{"lambda1", hp.lambda1},
          {"lambda2", hp.lambda2},
          {"gamma1", hp.gamma1},
          {"gamma2", hp.gamma2},
          {"loss_variant", to_string(hp.loss_variant)}};
}

Hyperparams hyperparams_from_json(const json& j) {
  reject_unknown_keys(j, {"lambda1", "lambda2", "gamma1", "gamma2", "loss_variant"},
                      "hyperparams");
  Hyperparams hp;
  read_key(j, "lambda1", hp.lambda1);
  read_key(j, "lambda2", hp.lambda2);
  read_key(j, "gamma1", hp.gamma1);
  read_key(j, "gamma2", hp.gamma2);
  std::string variant = to_string(hp.loss_variant);
  read_key(j, "loss_variant", variant);
  hp.loss_variant = parse_loss_variant(variant);
  hp.validate();
  return hp;
}

json to_json(const OptimizerConfig& cfg) {
  return {{"max_iterations", cfg.max_iterations},
          {"update_norm_tol", cfg.update_norm_tol},
          {"initial_step", cfg.initial_step},
          {"history_size", cfg.history_size},
          {"wolfe_c1", cfg.wolfe_c1},
          {"wolfe_c2", cfg.wolfe_c2},
          {"max_line_search_evals", cfg.max_line_search_evals}};
}

OptimizerConfig optimizer_config_from_json(const json& j) {
  reject_unknown_keys(j,
                      {"max_iterations", "update_norm_tol", "initial_step", "history_size",
                       "wolfe_c1", "wolfe_c2", "max_line_search_evals"},
                      "optimizer");
  OptimizerConfig cfg;
  read_key(j, "max_iterations", cfg.max_iterations);
  read_key(j, "update_norm_tol", cfg.update_norm_tol);
  read_key(j, "initial_step", cfg.initial_step);
  read_key(j, "history_size", cfg.history_size);
  read_key(j, "wolfe_c1", cfg.wolfe_c1);
  read_key(j, "wolfe_c2", cfg.wolfe_c2);
  read_key(j, "max_line_search_evals", cfg.max_line_search_evals);
  cfg.validate();
  return cfg;
}

json to_json(const AddReport& r) {
  return {{"doc_id", r.doc_id},
          {"row", r.row},
          {"feasible", r.feasible},
          {"iterations", r.iterations},
          {"total_iterations", r.total_iterations},
          {"restarts", r.restarts},
          {"converged_by_tol", r.converged_by_tol},
          {"final_loss", r.final_loss},
          {"min_old_margin", r.min_old_margin},
          {"new_margin", r.new_margin},
          {"wall_millis", r.wall_millis}};
}

json to_json(const MetricsReport& r) {
  return {{"hits1_orig", metric_or_null(r.original, &SplitMetrics::hits1)},
          {"hits5_orig", metric_or_null(r.original, &SplitMetrics::hits5)},
          {"hits10_orig", metric_or_null(r.original, &SplitMetrics::hits10)},
          {"mrr10_orig", metric_or_null(r.original, &SplitMetrics::mrr10)},
          {"hits1_new", metric_or_null(r.added, &SplitMetrics::hits1)},
          {"hits5_new", metric_or_null(r.added, &SplitMetrics::hits5)},
          {"hits10_new", metric_or_null(r.added, &SplitMetrics::hits10)},
          {"mrr10_new", metric_or_null(r.added, &SplitMetrics::mrr10)},
          {"n_orig_queries", r.n_orig_queries},
          {"n_new_queries", r.n_new_queries}};
}

json read_json_file(const std::filesystem::path& path) {
  try {
    return json::parse(io::read_file(path));
  } catch (const json::parse_error& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

}  // namespace incdsi
