#pragma once

#include <filesystem>

#include <json.hpp>

#include "incdsi/incremental.hpp"
#include "incdsi/lbfgs.hpp"
#include "incdsi/metrics.hpp"
#include "incdsi/objective.hpp"

// JSON shapes shared by the CLI, the HTTP service and the Python bindings.

namespace incdsi {

nlohmann::json to_json(const Hyperparams& hp);
/// Missing keys keep their defaults; unknown keys are rejected.
Hyperparams hyperparams_from_json(const nlohmann::json& j);

nlohmann::json to_json(const OptimizerConfig& cfg);
OptimizerConfig optimizer_config_from_json(const nlohmann::json& j);

nlohmann::json to_json(const AddReport& report);

/// Flat object: hits1_orig, hits5_orig, hits10_orig, mrr10_orig, hits1_new,
/// hits5_new, hits10_new, mrr10_new, n_orig_queries, n_new_queries. Metrics of
/// an empty partition are null.
nlohmann::json to_json(const MetricsReport& report);

nlohmann::json read_json_file(const std::filesystem::path& path);

}  // namespace incdsi
