#pragma once

#include <optional>
#include <string>

#include <json.hpp>

namespace logz {

struct ExperimentConfig {
  std::string experiment;
  nlohmann::json instance;
  std::string method;
  nlohmann::json params;
  std::uint64_t seed = 0;
  std::string output_dir;
  int threads = 1;
};

// Returns the missing/invalid field name on failure.
std::optional<ExperimentConfig> parse_experiment_config(const nlohmann::json& doc,
                                                        std::string* bad_field);

// Closed-form Z for instances that have one (gaussian, diag_quadratic, hard).
std::optional<double> true_partition_function(const nlohmann::json& instance_spec);

// Runs one experiment, writing results.csv and summary.json under
// cfg.output_dir. Deterministic given (config, seed). Returns the process
// exit code: 0 on success (numerical divergence is recorded in summary.json,
// with partial results preserved), nonzero only on contract violations.
int run_experiment(const ExperimentConfig& cfg);

}  // namespace logz
