#pragma once

#include "wass/class_weights.hpp"

#include <cstddef>

namespace wass {

struct SinkhornConfig {
  double epsilon = 0.0;  // absolute regularization, must be > 0
  std::size_t max_iters = 10000;
  double tol = 1e-7;
  /// Geometric decay applied to the regularization every decay_interval
  /// iterations, starting from mean(D) down to epsilon. 1 disables scaling.
  double epsilon_schedule = 0.9;
  std::size_t decay_interval = 100;
  /// Skip the log-domain path even for small epsilon (testing underflow).
  bool force_kernel = false;

  /// Defaults with epsilon = relative * mean(D).
  static SinkhornConfig for_distances(const DistanceMatrix& d, double relative = 0.01);
};

/// Entropic approximation of the class-weight problem by alternating KL
/// projections onto: the column marginal, equal row sums within each class
/// (class mass free) and unit total mass. Each iteration costs O(n m).
///
/// The reported plan is rounded onto the feasible set, so its objective is an
/// upper bound on the exact optimum; dual_objective is a certified lower bound
/// built from the row potentials. If the marginal violation stays above
/// 10 * tol after max_iters, the best iterate is returned with converged = false
/// and a warning.
ClassWeightSolution sinkhorn_class_weights(const DistanceMatrix& distances,
                                           const ClassPartition& classes,
                                           const SinkhornConfig& config);

/// Projects a nonnegative n x m matrix onto {column sums 1/m, equal row sums
/// within each class} by column rescaling, row truncation and a rank-one fill.
Matrix round_to_class_feasible(const Matrix& plan, const ClassPartition& classes);

}  // namespace wass
