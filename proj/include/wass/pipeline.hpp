#pragma once

#include "wass/bounds.hpp"
#include "wass/class_weights.hpp"
#include "wass/head.hpp"
#include "wass/select.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace wass {

struct ClassAccuracy {
  ClassId class_id = 0;
  std::size_t count = 0;
  double accuracy = 0.0;
};

struct EvalReport {
  double zero_one_error = 0.0;
  double cross_entropy = 0.0;
  std::vector<ClassAccuracy> per_class;  // sorted by class id
  std::size_t n_eval = 0;
};

/// Argmax prediction with ties broken toward the lowest head row.
std::vector<int> predict(const SoftmaxHead& head, const Matrix& features);

/// Labels are original class ids; every id must be one of the head's classes.
EvalReport evaluate(const SoftmaxHead& head, const Matrix& features, std::span<const ClassId> labels);

enum class Method { Wass, WassSinkhorn, All, Rnd, Mn };

Method parse_method(const std::string& name);
std::string to_string(Method method);

/// ALL: uniform. RND: uniform over a uniformly drawn nonempty class subset.
/// MN: uniform over the mn_top classes whose mean is closest to the target mean.
ClassWeights baseline_weights(Method method, const LabeledDataset& source, const FeatureMatrix& target,
                              std::uint64_t seed, std::size_t mn_top = 3);

/// `budget` i.i.d. draws with replacement from sample_probs.
LabeledDataset resample_fixed_budget(const LabeledDataset& dataset, std::span<const double> sample_probs,
                                     std::size_t budget, std::uint64_t seed);

struct PipelineConfig {
  Method method = Method::Wass;
  /// Source draws used for pre-training; 0 trains on the full source with
  /// importance weights instead.
  std::size_t budget = 0;
  /// Width of the linear encoder learned during pre-training; 0 trains the
  /// head directly on the given embeddings.
  std::size_t encoder_dim = 0;
  std::size_t mn_top = 3;
  std::uint64_t seed = 0;
  TrainConfig pretrain;
  TrainConfig finetune;
  SelectOptions select;
};

struct PipelineResult {
  ClassWeights weights;
  std::vector<ClassId> source_class_ids;
  double w1_objective = 0.0;  // W1 between reweighted source and target train
  std::size_t support_size = 0;
  std::string solver;
  TrainResult pretrained;
  TrainResult finetuned;
  EvalReport target_eval;
  /// Pre-training distribution: features, labels and per-row masses.
  LabeledDataset pretrain_set;
  std::vector<double> pretrain_masses;
  std::vector<std::string> warnings;
  std::vector<std::pair<std::string, double>> timings_ms;
};

/// Weights, pre-training (with optional encoder), head-only fine-tuning on the
/// encoded target train split, evaluation on the encoded target test split.
PipelineResult run_pipeline(const LabeledDataset& source, const LabeledDataset& target_train,
                            const LabeledDataset& target_test, const PipelineConfig& config);

/// Transfer bound for a finished run: the pre-training distribution against
/// `target_eval`, both passed through the run's encoder.
BoundReport pipeline_bound_report(const PipelineResult& result, const LabeledDataset& target_eval);

std::string eval_report_json(const EvalReport& report);

}  // namespace wass
