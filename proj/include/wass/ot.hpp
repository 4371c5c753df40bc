#pragma once

#include "wass/data_model.hpp"
#include "wass/distance.hpp"

#include <cstddef>

namespace wass {

/// Discrete optimal transport with fixed marginals.
struct OtProblem {
  Matrix cost;  // n x m, nonnegative
  Vector mu;    // n
  Vector nu;    // m
};

struct OtOptions {
  double perturbation = 1e-12;
  std::size_t max_iterations = 0;  // 0: 20 * n * m + 1000
  std::size_t bland_after = 50;
};

/// Exact solution together with its optimality certificate.
struct OtResult {
  TransportPlan plan;
  Vector u;  // row potentials
  Vector v;  // column potentials, v_j = min_i (C_ij - u_i)
  double dual_objective = 0.0;  // mu.u + nu.v of the feasible dual above
  double duality_gap = 0.0;     // objective - dual_objective
  std::size_t iterations = 0;
};

/// Transportation simplex: northwest-corner start, stepping-stone cycle pivots,
/// Dantzig pricing with a fall back to Bland's rule on degenerate streaks.
/// Degeneracy is avoided by shifting mu_i by perturbation * (i + 1) and the last
/// nu entry by the total shift; the final plan is recomputed on the optimal
/// tree with the exact marginals.
OtResult solve_exact_ot(const OtProblem& problem, const OtOptions& options = {});

/// Convenience wrappers returning only the transport cost.
double wasserstein1(const Matrix& cost, const Vector& mu, const Vector& nu);
double wasserstein1(const FeatureMatrix& a, const Vector& mu, const FeatureMatrix& b,
                    const Vector& nu);

Vector uniform_marginal(std::size_t n);

/// W1 over feature x label with ground cost |z - z'|_2 + label_cost * [y != y'].
double joint_wasserstein(const DiscreteJointDistribution& p, const DiscreteJointDistribution& q,
                         double label_cost = 1.0);

/// W1 between the feature marginals of two joint distributions (labels ignored).
double marginal_wasserstein(const DiscreteJointDistribution& p, const DiscreteJointDistribution& q);

enum class ConditionalWeighting { Source, Target };

/// E_{z ~ chosen marginal} W1(p(y|z), q(y|z)) with the 0-1 label metric.
/// Z atoms are grouped by exact feature equality.
double conditional_wasserstein_term(const DiscreteJointDistribution& p,
                                    const DiscreteJointDistribution& q,
                                    ConditionalWeighting weighting);

}  // namespace wass
