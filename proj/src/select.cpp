#include "wass/select.hpp"

#include "wass/error.hpp"

namespace wass {

SolverKind parse_solver_kind(const std::string& name) {
  if (name == "auto") return SolverKind::Auto;
  if (name == "exact") return SolverKind::Exact;
  if (name == "sinkhorn") return SolverKind::Sinkhorn;
  fail(ErrorKind::InvalidArgument, "unknown solver '" + name + "' (expected auto, exact or sinkhorn)");
}

std::string to_string(SolverKind kind) {
  switch (kind) {
    case SolverKind::Auto: return "auto";
    case SolverKind::Exact: return "exact";
    case SolverKind::Sinkhorn: return "sinkhorn";
  }
  return "unknown";
}

ClassWeightSolution select_class_weights(const DistanceMatrix& distances,
                                         const ClassPartition& classes,
                                         const SelectOptions& options) {
  SolverKind kind = options.solver;
  if (kind == SolverKind::Auto) {
    double size = static_cast<double>(distances.rows()) * static_cast<double>(distances.cols());
    kind = size > options.sinkhorn_threshold ? SolverKind::Sinkhorn : SolverKind::Exact;
  }
  if (kind == SolverKind::Exact) return solve_class_weights(distances, classes);
  SinkhornConfig cfg = SinkhornConfig::for_distances(distances);
  if (options.epsilon) cfg.epsilon = *options.epsilon;
  if (options.sinkhorn_tol) cfg.tol = *options.sinkhorn_tol;
  if (options.sinkhorn_max_iters) cfg.max_iters = *options.sinkhorn_max_iters;
  return sinkhorn_class_weights(distances, classes, cfg);
}

ClassWeightSolution select_class_weights(const LabeledDataset& source, const FeatureMatrix& target,
                                         const SelectOptions& options) {
  return select_class_weights(pairwise_distances(source.features(), target),
                              ClassPartition::from_labels(source.labels(), source.num_classes()),
                              options);
}

}  // namespace wass
