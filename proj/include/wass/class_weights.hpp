#pragma once

#include "wass/data_model.hpp"
#include "wass/distance.hpp"

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace wass {

/// Assignment of distance-matrix rows to source classes.
struct ClassPartition {
  std::vector<int> row_class;
  std::vector<std::size_t> counts;

  /// Rows grouped in contiguous blocks: counts[0] rows of class 0, then class 1, ...
  static ClassPartition from_counts(std::span<const std::size_t> counts);
  static ClassPartition from_labels(std::span<const int> labels, std::size_t num_classes);

  std::size_t num_rows() const { return row_class.size(); }
  std::size_t num_classes() const { return counts.size(); }
};

struct ClassWeightSolution {
  ClassWeights weights;
  TransportPlan plan;
  double objective = 0.0;
  std::size_t support_size = 0;
  double dual_objective = 0.0;
  double duality_gap = 0.0;
  std::size_t iterations = 0;
  bool converged = true;
  std::string solver;
  std::vector<std::string> warnings;
};

struct ExactOptions {
  /// Adds sum_i n_i t_i = 1 as an explicit (redundant) constraint.
  bool explicit_simplex_row = false;
  double perturbation = 1e-12;
};

/// Jointly optimal class weights and coupling for
///   min <D, P>  s.t.  P >= 0,  P^T 1 = 1/m,  rowsum_r(P) = w_i / n_i for r in class i.
/// The weights are eliminated through one auxiliary variable per class
/// (t_i = w_i / n_i), so nonnegativity and unit sum of w follow from the
/// constraints and are checked afterwards.
ClassWeightSolution solve_class_weights(const DistanceMatrix& distances,
                                        const ClassPartition& classes,
                                        const ExactOptions& options = {});

struct BruteForceResult {
  ClassWeights weights;
  double objective = 0.0;
  std::size_t evaluated = 0;
};

/// Grid search over the simplex (spacing grid_step) with one fixed-marginal OT
/// per grid point. Independent reference for solve_class_weights, k <= 4.
BruteForceResult brute_force_class_weights(const DistanceMatrix& distances,
                                           const ClassPartition& classes, double grid_step);

/// Per-row source marginal w_i / n_i.
Vector class_weights_to_marginal(const ClassWeights& w, const ClassPartition& classes);

/// Sample j with label i gets probability w_i / n_i.
std::vector<double> weights_to_sample_probabilities(const ClassWeights& w,
                                                    std::span<const int> labels);

/// W1 between the w-reweighted source and the uniform target.
double reweighted_wasserstein(const DistanceMatrix& distances, const ClassPartition& classes,
                              const ClassWeights& w);

}  // namespace wass
