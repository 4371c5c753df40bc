#include "wass/class_weights.hpp"

#include "wass/error.hpp"
#include "wass/lp.hpp"
#include "wass/ot.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

namespace wass {

ClassPartition ClassPartition::from_counts(std::span<const std::size_t> counts) {
  ClassPartition p;
  p.counts.assign(counts.begin(), counts.end());
  for (std::size_t i = 0; i < counts.size(); ++i) {
    if (counts[i] == 0) fail(ErrorKind::InvalidArgument, "every class needs at least one row");
    p.row_class.insert(p.row_class.end(), counts[i], static_cast<int>(i));
  }
  return p;
}

ClassPartition ClassPartition::from_labels(std::span<const int> labels, std::size_t num_classes) {
  ClassPartition p;
  p.row_class.assign(labels.begin(), labels.end());
  p.counts.assign(num_classes, 0);
  for (int y : labels) {
    if (y < 0 || static_cast<std::size_t>(y) >= num_classes)
      fail(ErrorKind::DimensionMismatch, "label outside [0, k)");
    ++p.counts[static_cast<std::size_t>(y)];
  }
  for (std::size_t c : p.counts)
    if (c == 0) fail(ErrorKind::InvalidArgument, "every class needs at least one row");
  return p;
}

namespace {

void check_shapes(const DistanceMatrix& d, const ClassPartition& classes) {
  if (classes.num_classes() == 0) fail(ErrorKind::InvalidArgument, "need at least one class");
  if (classes.num_rows() != d.rows())
    fail(ErrorKind::DimensionMismatch, "class partition covers " +
                                           std::to_string(classes.num_rows()) +
                                           " rows, distance matrix has " + std::to_string(d.rows()));
}

// Basic feasible start for the perturbed LP: all mass on one class (t_c0
// basic) and a northwest-corner tree for the transportation part.
std::vector<int> crash_basis(const DistanceMatrix& d, const ClassPartition& classes,
                             double eps, std::size_t first_t) {
  const std::size_t n = d.rows(), m = d.cols(), k = classes.num_classes();
  std::vector<double> class_cost(k, 0.0);
  for (std::size_t r = 0; r < n; ++r)
    class_cost[static_cast<std::size_t>(classes.row_class[r])] += d.values().row(static_cast<Eigen::Index>(r)).mean();
  std::size_t c0 = 0;
  for (std::size_t i = 0; i < k; ++i) {
    class_cost[i] /= static_cast<double>(classes.counts[i]);
    if (class_cost[i] < class_cost[c0]) c0 = i;
  }

  std::vector<double> supply(n), demand(m);
  double pert_rows = 0.0, total_demand = 0.0;
  for (std::size_t r = 0; r < n; ++r) pert_rows += eps * static_cast<double>(r + 1);
  for (std::size_t j = 0; j < m; ++j) {
    demand[j] = 1.0 / static_cast<double>(m) + eps * static_cast<double>(n + j + 1);
    total_demand += demand[j];
  }
  double level = (total_demand - pert_rows) / static_cast<double>(classes.counts[c0]);
  for (std::size_t r = 0; r < n; ++r)
    supply[r] = eps * static_cast<double>(r + 1) +
                (static_cast<std::size_t>(classes.row_class[r]) == c0 ? level : 0.0);

  std::vector<int> basis;
  basis.reserve(n + m);
  std::size_t i = 0, j = 0;
  while (true) {
    double f = std::min(supply[i], demand[j]);
    supply[i] -= f;
    demand[j] -= f;
    basis.push_back(static_cast<int>(i * m + j));
    if (i == n - 1 && j == m - 1) break;
    if (i == n - 1) ++j;
    else if (j == m - 1) ++i;
    else if (supply[i] <= demand[j]) ++i;
    else ++j;
  }
  basis.push_back(static_cast<int>(first_t + c0));
  return basis;
}

std::vector<std::vector<std::size_t>> rows_by_class(const ClassPartition& classes) {
  std::vector<std::vector<std::size_t>> out(classes.num_classes());
  for (std::size_t r = 0; r < classes.num_rows(); ++r)
    out[static_cast<std::size_t>(classes.row_class[r])].push_back(r);
  return out;
}

}  // namespace

ClassWeightSolution solve_class_weights(const DistanceMatrix& distances,
                                        const ClassPartition& classes,
                                        const ExactOptions& options) {
  check_shapes(distances, classes);
  const std::size_t n = distances.rows(), m = distances.cols(), k = classes.num_classes();
  const Matrix& D = distances.values();

  lp::Problem problem;
  problem.num_rows = n + m + (options.explicit_simplex_row ? 1 : 0);
  problem.rhs.assign(problem.num_rows, 0.0);
  for (std::size_t j = 0; j < m; ++j) problem.rhs[n + j] = 1.0 / static_cast<double>(m);
  if (options.explicit_simplex_row) problem.rhs[n + m] = 1.0;
  problem.columns.reserve(n * m + k);
  problem.cost.reserve(n * m + k);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t j = 0; j < m; ++j)
      problem.add_column(D(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(j)),
                         {{static_cast<int>(r), static_cast<int>(n + j)}, {1.0, 1.0}});
  const std::size_t first_t = n * m;
  auto members = rows_by_class(classes);
  for (std::size_t i = 0; i < k; ++i) {
    lp::Column col;
    for (std::size_t r : members[i]) {
      col.rows.push_back(static_cast<int>(r));
      col.values.push_back(-1.0);
    }
    if (options.explicit_simplex_row) {
      col.rows.push_back(static_cast<int>(n + m));
      col.values.push_back(static_cast<double>(classes.counts[i]));
    }
    problem.add_column(0.0, std::move(col));
  }

  lp::Options lp_options;
  lp_options.perturbation = options.perturbation;
  if (!options.explicit_simplex_row)
    lp_options.initial_basis = crash_basis(distances, classes, options.perturbation, first_t);
  lp::Solution sol = lp::solve(problem, lp_options);
  if (sol.status != lp::Status::Optimal)
    fail(ErrorKind::SolverFailure, "class-weight LP ended with status " + lp::to_string(sol.status));

  TransportPlan plan;
  plan.plan.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(m));
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t j = 0; j < m; ++j)
      plan.plan(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(j)) = sol.x[r * m + j];
  plan.target_marginal = uniform_marginal(m);
  Vector row_sums = plan.plan.rowwise().sum();

  std::vector<double> w(k, 0.0);
  for (std::size_t r = 0; r < n; ++r) w[static_cast<std::size_t>(classes.row_class[r])] += row_sums[static_cast<Eigen::Index>(r)];
  for (std::size_t i = 0; i < k; ++i) {
    double from_t = static_cast<double>(classes.counts[i]) * sol.x[first_t + i];
    if (std::abs(from_t - w[i]) > 1e-7)
      fail(ErrorKind::SolverFailure, "class weight disagrees with its row sums");
  }
  plan.source_marginal.resize(static_cast<Eigen::Index>(n));
  for (std::size_t r = 0; r < n; ++r) {
    auto c = static_cast<std::size_t>(classes.row_class[r]);
    plan.source_marginal[static_cast<Eigen::Index>(r)] = w[c] / static_cast<double>(classes.counts[c]);
  }
  plan.objective = plan.plan.cwiseProduct(D).sum();

  // Feasible dual from the simplex multipliers: restore sum_{r in i} u_r >= 0
  // by shifting u within the class, then take the tightest v.
  Vector u(static_cast<Eigen::Index>(n));
  for (std::size_t r = 0; r < n; ++r) u[static_cast<Eigen::Index>(r)] = sol.duals[r];
  for (std::size_t i = 0; i < k; ++i) {
    double s = 0.0;
    for (std::size_t r : members[i]) s += u[static_cast<Eigen::Index>(r)];
    if (s < 0.0)
      for (std::size_t r : members[i]) u[static_cast<Eigen::Index>(r)] -= s / static_cast<double>(members[i].size());
  }
  double dual = 0.0;
  for (std::size_t j = 0; j < m; ++j) dual += (D.col(static_cast<Eigen::Index>(j)) - u).minCoeff();
  dual /= static_cast<double>(m);

  ClassWeights weights(w);
  ClassWeightSolution out{weights, std::move(plan), 0.0, 0, 0.0, 0.0, 0, true, "exact", {}};
  out.objective = out.plan.objective;
  out.support_size = weights.support().size();
  out.dual_objective = dual;
  out.duality_gap = out.objective - dual;
  out.iterations = sol.iterations;
  out.solver = "exact";
  return out;
}

Vector class_weights_to_marginal(const ClassWeights& w, const ClassPartition& classes) {
  if (w.size() != classes.num_classes())
    fail(ErrorKind::DimensionMismatch, "weights and class partition disagree on k");
  Vector a(static_cast<Eigen::Index>(classes.num_rows()));
  for (std::size_t r = 0; r < classes.num_rows(); ++r) {
    auto c = static_cast<std::size_t>(classes.row_class[r]);
    a[static_cast<Eigen::Index>(r)] = std::max(w[c], 0.0) / static_cast<double>(classes.counts[c]);
  }
  return a / a.sum();
}

double reweighted_wasserstein(const DistanceMatrix& distances, const ClassPartition& classes,
                              const ClassWeights& w) {
  check_shapes(distances, classes);
  return wasserstein1(distances.values(), class_weights_to_marginal(w, classes),
                      uniform_marginal(distances.cols()));
}

BruteForceResult brute_force_class_weights(const DistanceMatrix& distances,
                                           const ClassPartition& classes, double grid_step) {
  check_shapes(distances, classes);
  const std::size_t k = classes.num_classes();
  if (k > 4) fail(ErrorKind::TooManyClasses, "grid enumeration supports k <= 4, got " + std::to_string(k));
  if (!(grid_step > 0.0) || grid_step > 1.0)
    fail(ErrorKind::InvalidArgument, "grid_step must lie in (0, 1]");

  const auto steps = static_cast<long>(std::floor(1.0 / grid_step + 1e-9));
  const Vector nu = uniform_marginal(distances.cols());
  std::vector<long> counts(k, 0);
  std::vector<double> best_w;
  double best = std::numeric_limits<double>::infinity();
  std::size_t evaluated = 0;

  // Free coordinates are multiples of grid_step; the last takes the remainder.
  std::function<void(std::size_t, long)> visit = [&](std::size_t idx, long used) {
    if (idx + 1 == k) {
      std::vector<double> w(k);
      double acc = 0.0;
      for (std::size_t i = 0; i + 1 < k; ++i) {
        w[i] = static_cast<double>(counts[i]) * grid_step;
        acc += w[i];
      }
      w[k - 1] = std::max(0.0, 1.0 - acc);
      ClassWeights cw(w);
      double obj = wasserstein1(distances.values(), class_weights_to_marginal(cw, classes), nu);
      ++evaluated;
      if (obj < best) {
        best = obj;
        best_w = w;
      }
      return;
    }
    for (long c = 0; used + c <= steps; ++c) {
      counts[idx] = c;
      visit(idx + 1, used + c);
    }
  };
  visit(0, 0);
  return {ClassWeights(best_w), best, evaluated};
}

std::vector<double> weights_to_sample_probabilities(const ClassWeights& w,
                                                    std::span<const int> labels) {
  std::vector<std::size_t> counts(w.size(), 0);
  for (int y : labels) {
    if (y < 0 || static_cast<std::size_t>(y) >= w.size())
      fail(ErrorKind::DimensionMismatch, "label outside the weight vector");
    ++counts[static_cast<std::size_t>(y)];
  }
  for (std::size_t i = 0; i < w.size(); ++i)
    if (counts[i] == 0 && w[i] > kWeightClampTolerance)
      fail(ErrorKind::DimensionMismatch, "class with positive weight has no samples");
  std::vector<double> p(labels.size());
  double total = 0.0;
  for (std::size_t j = 0; j < labels.size(); ++j) {
    auto c = static_cast<std::size_t>(labels[j]);
    p[j] = std::max(w[c], 0.0) / static_cast<double>(counts[c]);
    total += p[j];
  }
  for (double& v : p) v /= total;
  return p;
}

}  // namespace wass
