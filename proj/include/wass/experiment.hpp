#pragma once

#include "wass/pipeline.hpp"
#include "wass/synth.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace wass {

struct ExperimentScenario {
  std::string name;
  ScenarioConfig config;  // seed is replaced by each run's seed
};

struct ExperimentConfig {
  std::vector<Method> methods;
  std::vector<std::uint64_t> seeds;
  std::size_t budget = 0;
  std::size_t encoder_dim = 3;
  std::size_t mn_top = 3;
  std::size_t threads = 0;  // 0: hardware concurrency
  TrainConfig pretrain;
  TrainConfig finetune;
  std::vector<ExperimentScenario> scenarios;
};

/// Sectioned key = value text: one [experiment] section and one
/// [scenario NAME] section per scenario. '#' and ';' start comments.
ExperimentConfig parse_experiment_config(const std::string& text);
ExperimentConfig load_experiment_config(const std::filesystem::path& path);
std::string experiment_config_json(const ExperimentConfig& config);

struct ExperimentRow {
  std::string scenario;
  std::string method;
  std::uint64_t seed = 0;
  double accuracy = 0.0;
  double w1_objective = 0.0;
  std::size_t support_size = 0;
  std::string status;  // "ok" or "error: ..."
};

struct ExperimentSummary {
  std::string scenario;
  std::string method;
  double mean_accuracy = 0.0;
  double std_accuracy = 0.0;  // sample standard deviation
  double mean_w1 = 0.0;
  double mean_support = 0.0;
  std::size_t runs_ok = 0;
  std::size_t runs = 0;
};

struct ExperimentResult {
  std::vector<ExperimentRow> rows;         // scenario, method, seed in config order
  std::vector<ExperimentSummary> summary;  // scenario, method in config order
};

/// Runs every (scenario, method, seed) cell on a worker pool. Failed cells
/// are recorded with their error and the run continues.
ExperimentResult run_experiment(const ExperimentConfig& config);

/// Columns: scenario, method, seed, accuracy, accuracy_std, w1_objective,
/// support_size, status. Summary rows carry seed "summary".
std::string experiment_csv(const ExperimentResult& result);

}  // namespace wass
