#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace wass::lp {

/// Sparse column of the constraint matrix.
struct Column {
  std::vector<int> rows;
  std::vector<double> values;
};

/// min c^T x  s.t.  A x = b,  x >= 0.
struct Problem {
  std::size_t num_rows = 0;
  std::vector<Column> columns;
  std::vector<double> cost;
  std::vector<double> rhs;

  std::size_t num_cols() const { return columns.size(); }
  /// Appends a column and returns its index.
  std::size_t add_column(double cost, Column column);
};

struct Options {
  /// Row i of b is shifted by perturbation * (i + 1) while pivoting (after rows
  /// with negative rhs are negated); the shift is removed from the returned x.
  double perturbation = 1e-12;
  std::size_t max_iterations = 0;  // 0: 50 * (rows + cols) + 1000
  std::size_t refactor_interval = 0;  // 0: max(50, rows / 4)
  /// Optional crash basis: num_rows structural column indices whose basic
  /// solution under the perturbed rhs is feasible. Ignored if singular or
  /// infeasible, in which case phase one runs from an artificial basis.
  std::vector<int> initial_basis;
  /// Consecutive degenerate pivots after which pricing switches to Bland's rule.
  std::size_t bland_after = 50;
};

enum class Status { Optimal, Infeasible, Unbounded, IterationLimit };

std::string to_string(Status s);

struct Solution {
  Status status = Status::IterationLimit;
  std::vector<double> x;
  /// Simplex multipliers y with reduced cost c_j - y^T a_j, in the caller's row signs.
  std::vector<double> duals;
  double objective = 0.0;
  double dual_objective = 0.0;  // b^T y
  double max_dual_infeasibility = 0.0;  // max(0, -min reduced cost)
  double max_primal_residual = 0.0;  // |A x - b|_inf
  std::size_t iterations = 0;
  std::size_t degenerate_pivots = 0;
  bool used_crash_basis = false;
  std::vector<int> basis;
};

Solution solve(const Problem& problem, const Options& options = {});

}  // namespace wass::lp
