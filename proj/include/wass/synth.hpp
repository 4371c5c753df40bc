#pragma once

#include "wass/data_model.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace wass {

struct SynthClass {
  Vector mean;
  double stddev = 1.0;
  std::size_t count = 0;
  ClassId id = 0;
};

struct SynthSpec {
  std::size_t dim = 0;
  std::vector<SynthClass> classes;
  std::uint64_t seed = 0;
};

/// Isotropic Gaussian samples per class, rows grouped by class in listed order.
LabeledDataset generate(const SynthSpec& recipe);

enum class ScenarioKind { Dda, Oda };

ScenarioKind parse_scenario_kind(const std::string& name);
std::string to_string(ScenarioKind kind);

struct ScenarioConfig {
  ScenarioKind kind = ScenarioKind::Dda;
  std::size_t k_source = 6;
  std::size_t k_target = 3;
  std::size_t overlap = 0;
  double separation = 4.0;
  std::size_t dim = 8;
  std::size_t per_class_source = 40;
  std::size_t per_class_target_train = 20;
  std::size_t per_class_target_test = 100;
  double stddev = 1.0;
  /// Fresh target classes placed at separation / 4 from a distinct source
  /// class. Unset: as many as possible.
  std::optional<std::size_t> near;
  std::uint64_t seed = 0;

  void validate() const;
};

struct Scenario {
  LabeledDataset source;
  LabeledDataset target_train;
  LabeledDataset target_test;
  Matrix source_means;  // k_source x dim, row i is class id i
  Matrix target_means;  // k_target x dim, in target class order
  std::vector<ClassId> target_ids;
  /// For each target class: the source class it copies or sits next to, or -1.
  std::vector<ClassId> anchor;
  std::size_t near_count = 0;
};

/// Source classes get ids 0..k_source-1. Overlapping target classes reuse the
/// first `overlap` source ids and means; other target classes get fresh ids
/// starting at k_source. Means are drawn on a sphere whose radius grows with
/// the class count, rejecting candidates closer than `separation` to an
/// existing mean (at most 10^4 rejections).
Scenario make_scenario(const ScenarioConfig& config);

}  // namespace wass
