#pragma once

#include "wass/class_weights.hpp"
#include "wass/sinkhorn.hpp"

#include <cstddef>
#include <optional>
#include <string>

namespace wass {

enum class SolverKind { Auto, Exact, Sinkhorn };

SolverKind parse_solver_kind(const std::string& name);
std::string to_string(SolverKind kind);

struct SelectOptions {
  SolverKind solver = SolverKind::Auto;
  /// Auto switches to Sinkhorn when n * m exceeds this.
  double sinkhorn_threshold = 4e6;
  /// Unset fields fall back to SinkhornConfig::for_distances.
  std::optional<double> epsilon;
  std::optional<double> sinkhorn_tol;
  std::optional<std::size_t> sinkhorn_max_iters;
};

/// Class weights for a labeled source and an unlabeled target embedding set.
ClassWeightSolution select_class_weights(const DistanceMatrix& distances,
                                         const ClassPartition& classes,
                                         const SelectOptions& options = {});

ClassWeightSolution select_class_weights(const LabeledDataset& source, const FeatureMatrix& target,
                                         const SelectOptions& options = {});

}  // namespace wass
