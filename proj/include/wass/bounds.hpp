#pragma once

#include "wass/data_model.hpp"
#include "wass/head.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace wass {

/// sqrt(K - 1) / K.
double softmax_lipschitz_constant(std::size_t K);

/// Largest |softmax(v) - softmax(v')|_1 / |v - v'|_2 over `trials` random
/// logit pairs. Trial t draws components from N(0, s^2) with s cycling through
/// 0.1, 1 and 10; pairs closer than 1e-12 are skipped.
double verify_softmax_lipschitz(std::size_t K, std::size_t trials, std::uint64_t seed);

struct SingularValueEstimate {
  double value = 0.0;
  std::size_t iterations = 0;
  bool converged = true;
};

/// Power iteration on M^T M from the normalized all-ones vector, stopped when
/// successive estimates differ by less than 1e-12 relative (cap 10^5 steps),
/// then iterated until the estimate is stationary (at most 200 more steps).
SingularValueEstimate largest_singular_value(const Matrix& M);

/// (1 / 2n) sum_j |h(x_j) - e_{y_j}|_1, optionally mass-weighted. A label of -1
/// marks a class the classifier cannot output; such samples contribute 1.
double induced_error(const Matrix& probs, std::span<const int> labels);
double induced_error(const Matrix& probs, std::span<const int> labels, std::span<const double> masses);

struct RhoEstimate {
  double lower = 0.0;  // max pairwise |h(x) - h(x')|_1 / |x - x'|_2
  double upper = 0.0;  // softmax_lipschitz_constant(K) * sigma_max(V)
};

RhoEstimate estimate_rho(const SoftmaxHead& head, const Matrix& features);

struct InequalityCheck {
  double lhs = 0.0;
  double rhs = 0.0;
  bool holds = false;
};

/// |eps_p(h) - eps_q(h)| against max{rho_upper, 1} * W1(p, q) with the 0-1
/// label cost. Labels the head cannot output count as errors.
InequalityCheck check_error_difference_bound(const DiscreteJointDistribution& p,
                                             const DiscreteJointDistribution& q, const SoftmaxHead& head);

/// W1(p, q) against W1 of the feature marginals plus the smaller conditional term.
InequalityCheck check_decomposition(const DiscreteJointDistribution& p, const DiscreteJointDistribution& q);

double assemble_transfer_bound(double eps_source_pretrained, double w1, double rho, double alpha, double beta,
                               double sigma_max_diff);

/// Largest row norm.
double beta_bound(const Matrix& features);

/// Head over `classes`; rows for ids the head lacks are zero.
SoftmaxHead lift_head(const SoftmaxHead& head, const std::vector<ClassId>& classes);

struct BoundReport {
  double eps_source = 0.0;
  double eps_target = 0.0;
  double eps_target_zero_one = 0.0;
  double w1_marginal = 0.0;
  double w1_joint = 0.0;
  std::optional<double> cond_term_source;
  std::optional<double> cond_term_target;
  double rho_hat = 0.0;
  double rho_upper = 0.0;
  double alpha = 0.0;
  double beta = 0.0;
  double sigma_max_diff = 0.0;
  double bound_value = 0.0;
  bool holds = false;
  /// min over the two trained heads of eps_S + eps_T on the given samples.
  double lambda_hat = 0.0;
  std::size_t num_classes = 0;
};

/// Both heads are lifted onto the union of their class ids (pre-trained
/// classes first) and compared there. `source` carries the pre-training
/// distribution, `target` the target evaluation distribution, both in the
/// feature space the heads act on.
BoundReport transfer_bound_report(const SoftmaxHead& pretrained, const SoftmaxHead& finetuned,
                                  const DiscreteJointDistribution& source,
                                  const DiscreteJointDistribution& target);

std::string bound_report_json(const BoundReport& report);

}  // namespace wass
