#include "wass/lp.hpp"

#include "wass/error.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

namespace wass::lp {

std::size_t Problem::add_column(double c, Column column) {
  columns.push_back(std::move(column));
  cost.push_back(c);
  return columns.size() - 1;
}

std::string to_string(Status s) {
  switch (s) {
    case Status::Optimal: return "optimal";
    case Status::Infeasible: return "infeasible";
    case Status::Unbounded: return "unbounded";
    case Status::IterationLimit: return "iteration_limit";
  }
  return "unknown";
}

namespace {

constexpr double kPivotTolerance = 1e-9;

// Product-form update: B_k = B_0 E_1 ... E_k, E_t the identity with column
// `pos` replaced by the entering column expressed in the previous basis.
struct Eta {
  int pos;
  Eigen::VectorXd d;
};

class RevisedSimplex {
 public:
  RevisedSimplex(const Problem& p, const Options& o) : p_(p), o_(o) {
    m_ = static_cast<int>(p.num_rows);
    n_ = static_cast<int>(p.num_cols());
    sign_.assign(static_cast<std::size_t>(m_), 1.0);
    b_.resize(static_cast<std::size_t>(m_));
    b_pert_.resize(static_cast<std::size_t>(m_));
    for (int i = 0; i < m_; ++i) {
      double r = p.rhs[static_cast<std::size_t>(i)];
      if (r < 0.0) sign_[static_cast<std::size_t>(i)] = -1.0;
      b_[static_cast<std::size_t>(i)] = std::abs(r);
      b_pert_[static_cast<std::size_t>(i)] = std::abs(r) + o.perturbation * (i + 1);
    }
    double cmax = 1.0;
    for (double c : p.cost) cmax = std::max(cmax, std::abs(c));
    opt_tol_ = 1e-11 * cmax;
    max_iter_ = o.max_iterations ? o.max_iterations
                                 : 50 * (static_cast<std::size_t>(m_) + static_cast<std::size_t>(n_)) + 1000;
    refactor_interval_ = o.refactor_interval ? o.refactor_interval
                                             : std::max<std::size_t>(50, static_cast<std::size_t>(m_) / 4);
    pos_.assign(static_cast<std::size_t>(n_ + m_), -1);
  }

  Solution run() {
    Solution sol;
    if (try_crash()) {
      sol.used_crash_basis = true;
    } else {
      start_artificial();
      Status s1 = iterate(/*phase_one=*/true);
      if (s1 == Status::IterationLimit) return finish(sol, s1);
      double infeas = 0.0;
      double bsum = 0.0;
      for (int i = 0; i < m_; ++i) {
        bsum += b_pert_[static_cast<std::size_t>(i)];
        if (is_artificial(basis_[static_cast<std::size_t>(i)])) infeas += std::max(0.0, xb_[i]);
      }
      if (infeas > 1e-9 * std::max(1.0, bsum)) return finish(sol, Status::Infeasible);
      drive_out_artificials();
    }
    Status s2 = iterate(/*phase_one=*/false);
    return finish(sol, s2);
  }

 private:
  bool is_artificial(int j) const { return j >= n_; }

  double phase_cost(int j, bool phase_one) const {
    if (phase_one) return is_artificial(j) ? 1.0 : 0.0;
    return is_artificial(j) ? 0.0 : p_.cost[static_cast<std::size_t>(j)];
  }

  void column_dense(int j, Eigen::VectorXd& out) const {
    out.setZero(m_);
    if (is_artificial(j)) {
      out[j - n_] = 1.0;
      return;
    }
    const Column& c = p_.columns[static_cast<std::size_t>(j)];
    for (std::size_t t = 0; t < c.rows.size(); ++t)
      out[c.rows[t]] += c.values[t] * sign_[static_cast<std::size_t>(c.rows[t])];
  }

  double dot_column(int j, const Eigen::VectorXd& y) const {
    if (is_artificial(j)) return y[j - n_];
    const Column& c = p_.columns[static_cast<std::size_t>(j)];
    double s = 0.0;
    for (std::size_t t = 0; t < c.rows.size(); ++t)
      s += c.values[t] * sign_[static_cast<std::size_t>(c.rows[t])] * y[c.rows[t]];
    return s;
  }

  bool refactor() {
    Eigen::MatrixXd basis_matrix(m_, m_);
    Eigen::VectorXd col;
    for (int i = 0; i < m_; ++i) {
      column_dense(basis_[static_cast<std::size_t>(i)], col);
      basis_matrix.col(i) = col;
    }
    lu_.compute(basis_matrix);
    etas_.clear();
    double min_pivot = m_ ? lu_.matrixLU().diagonal().cwiseAbs().minCoeff() : 1.0;
    return min_pivot > 1e-11;
  }

  void ftran(Eigen::VectorXd& v) const {
    v = lu_.solve(v);
    for (const Eta& e : etas_) {
      double vp = v[e.pos] / e.d[e.pos];
      v -= vp * e.d;
      v[e.pos] = vp;
    }
  }

  void btran(Eigen::VectorXd& v) const {
    for (auto it = etas_.rbegin(); it != etas_.rend(); ++it) {
      double s = v[it->pos] - (it->d.dot(v) - it->d[it->pos] * v[it->pos]);
      v[it->pos] = s / it->d[it->pos];
    }
    v = lu_.transpose().solve(v);
  }

  void recompute_xb(const std::vector<double>& rhs) {
    xb_ = Eigen::Map<const Eigen::VectorXd>(rhs.data(), m_);
    ftran(xb_);
  }

  void set_basis(const std::vector<int>& basis) {
    std::fill(pos_.begin(), pos_.end(), -1);
    basis_ = basis;
    for (int i = 0; i < m_; ++i) pos_[static_cast<std::size_t>(basis_[static_cast<std::size_t>(i)])] = i;
  }

  bool try_crash() {
    const auto& init = o_.initial_basis;
    if (init.size() != static_cast<std::size_t>(m_)) return false;
    std::vector<char> seen(static_cast<std::size_t>(n_), 0);
    for (int j : init) {
      if (j < 0 || j >= n_ || seen[static_cast<std::size_t>(j)]) return false;
      seen[static_cast<std::size_t>(j)] = 1;
    }
    set_basis(init);
    if (!refactor()) return false;
    recompute_xb(b_pert_);
    double scale = 1.0;
    for (double b : b_pert_) scale = std::max(scale, b);
    if (xb_.size() && xb_.minCoeff() < -1e-13 * scale) return false;
    xb_ = xb_.cwiseMax(0.0);
    return true;
  }

  void start_artificial() {
    std::vector<int> basis(static_cast<std::size_t>(m_));
    for (int i = 0; i < m_; ++i) basis[static_cast<std::size_t>(i)] = n_ + i;
    set_basis(basis);
    refactor();
    recompute_xb(b_pert_);
  }

  void pivot(int entering, int pos, const Eigen::VectorXd& d, double theta) {
    xb_ -= theta * d;
    xb_[pos] = theta;
    pos_[static_cast<std::size_t>(basis_[static_cast<std::size_t>(pos)])] = -1;
    basis_[static_cast<std::size_t>(pos)] = entering;
    pos_[static_cast<std::size_t>(entering)] = pos;
    etas_.push_back({pos, d});
    ++iterations_;
    if (std::abs(theta) <= 1e-15) {
      ++degenerate_;
      ++streak_;
    } else {
      streak_ = 0;
    }
    if (etas_.size() >= refactor_interval_) {
      if (!refactor()) fail(ErrorKind::SolverFailure, "simplex basis became singular");
      recompute_xb(b_pert_);
    }
  }

  Status iterate(bool phase_one) {
    Eigen::VectorXd y(m_), d(m_);
    const double tol = phase_one ? 1e-11 : opt_tol_;
    while (true) {
      if (iterations_ >= max_iter_) return Status::IterationLimit;
      for (int i = 0; i < m_; ++i) y[i] = phase_cost(basis_[static_cast<std::size_t>(i)], phase_one);
      btran(y);

      const bool bland = streak_ > o_.bland_after;
      int entering = -1;
      double best = -tol;
      for (int j = 0; j < n_; ++j) {
        if (pos_[static_cast<std::size_t>(j)] >= 0) continue;
        double rc = phase_cost(j, phase_one) - dot_column(j, y);
        if (rc < best || (bland && rc < -tol)) {
          best = rc;
          entering = j;
          if (bland) break;
        }
      }
      if (entering < 0) return Status::Optimal;

      column_dense(entering, d);
      ftran(d);

      int leave = -1;
      double theta = std::numeric_limits<double>::infinity();
      double leave_mag = 0.0;
      for (int i = 0; i < m_; ++i) {
        int var = basis_[static_cast<std::size_t>(i)];
        double di = d[i];
        double ratio;
        if (!phase_one && is_artificial(var)) {
          // Leftover artificials sit on redundant rows and must stay at zero.
          if (std::abs(di) <= kPivotTolerance) continue;
          ratio = 0.0;
        } else {
          if (di <= kPivotTolerance) continue;
          ratio = std::max(xb_[i], 0.0) / di;
        }
        double tie = 1e-15 + 1e-12 * std::min(ratio, theta);
        bool take = false;
        if (ratio < theta - tie) {
          take = true;
        } else if (ratio <= theta + tie) {
          take = bland ? var < basis_[static_cast<std::size_t>(leave)]
                       : std::abs(di) > leave_mag;
        }
        if (take) {
          leave = i;
          theta = ratio;
          leave_mag = std::abs(di);
        }
      }
      if (leave < 0) return Status::Unbounded;
      pivot(entering, leave, d, theta);
    }
  }

  void drive_out_artificials() {
    Eigen::VectorXd r(m_), d(m_);
    for (int pos = 0; pos < m_; ++pos) {
      if (!is_artificial(basis_[static_cast<std::size_t>(pos)])) continue;
      r.setZero();
      r[pos] = 1.0;
      btran(r);
      int best = -1;
      double best_mag = 1e-7;
      for (int j = 0; j < n_; ++j) {
        if (pos_[static_cast<std::size_t>(j)] >= 0) continue;
        double a = std::abs(dot_column(j, r));
        if (a > best_mag) {
          best_mag = a;
          best = j;
        }
      }
      if (best < 0) continue;  // redundant row
      column_dense(best, d);
      ftran(d);
      pivot(best, pos, d, xb_[pos] / d[pos]);
    }
  }

  Solution& finish(Solution& sol, Status status) {
    sol.status = status;
    sol.iterations = iterations_;
    sol.degenerate_pivots = degenerate_;
    sol.x.assign(static_cast<std::size_t>(n_), 0.0);
    sol.duals.assign(static_cast<std::size_t>(m_), 0.0);
    sol.basis = basis_;
    if (status != Status::Optimal) return sol;

    if (!refactor()) fail(ErrorKind::SolverFailure, "final simplex basis is singular");
    recompute_xb(b_);
    for (int i = 0; i < m_; ++i) {
      int var = basis_[static_cast<std::size_t>(i)];
      if (!is_artificial(var)) sol.x[static_cast<std::size_t>(var)] = std::max(xb_[i], 0.0);
    }
    Eigen::VectorXd y(m_);
    for (int i = 0; i < m_; ++i) y[i] = phase_cost(basis_[static_cast<std::size_t>(i)], false);
    btran(y);

    sol.objective = 0.0;
    for (int j = 0; j < n_; ++j) sol.objective += p_.cost[static_cast<std::size_t>(j)] * sol.x[static_cast<std::size_t>(j)];
    sol.dual_objective = 0.0;
    for (int i = 0; i < m_; ++i) {
      sol.duals[static_cast<std::size_t>(i)] = y[i] * sign_[static_cast<std::size_t>(i)];
      sol.dual_objective += p_.rhs[static_cast<std::size_t>(i)] * sol.duals[static_cast<std::size_t>(i)];
    }
    double infeas = 0.0;
    for (int j = 0; j < n_; ++j) {
      double rc = p_.cost[static_cast<std::size_t>(j)] - dot_column(j, y);
      infeas = std::max(infeas, -rc);
    }
    sol.max_dual_infeasibility = infeas;

    std::vector<double> ax(static_cast<std::size_t>(m_), 0.0);
    for (int j = 0; j < n_; ++j) {
      double xj = sol.x[static_cast<std::size_t>(j)];
      if (xj == 0.0) continue;
      const Column& c = p_.columns[static_cast<std::size_t>(j)];
      for (std::size_t t = 0; t < c.rows.size(); ++t) ax[static_cast<std::size_t>(c.rows[t])] += c.values[t] * xj;
    }
    double res = 0.0;
    for (int i = 0; i < m_; ++i)
      res = std::max(res, std::abs(ax[static_cast<std::size_t>(i)] - p_.rhs[static_cast<std::size_t>(i)]));
    sol.max_primal_residual = res;
    return sol;
  }

  const Problem& p_;
  const Options& o_;
  int m_ = 0;
  int n_ = 0;
  std::vector<double> sign_;
  std::vector<double> b_;
  std::vector<double> b_pert_;
  std::vector<int> basis_;
  std::vector<int> pos_;
  Eigen::PartialPivLU<Eigen::MatrixXd> lu_;
  std::vector<Eta> etas_;
  Eigen::VectorXd xb_;
  double opt_tol_ = 1e-11;
  std::size_t iterations_ = 0;
  std::size_t degenerate_ = 0;
  std::size_t streak_ = 0;
  std::size_t max_iter_ = 0;
  std::size_t refactor_interval_ = 50;
};

void validate(const Problem& p) {
  if (p.num_rows == 0) fail(ErrorKind::InvalidArgument, "LP needs at least one constraint");
  if (p.rhs.size() != p.num_rows) fail(ErrorKind::DimensionMismatch, "rhs size != number of rows");
  if (p.cost.size() != p.columns.size())
    fail(ErrorKind::DimensionMismatch, "cost size != number of columns");
  for (const Column& c : p.columns) {
    if (c.rows.size() != c.values.size()) fail(ErrorKind::DimensionMismatch, "ragged LP column");
    for (int r : c.rows)
      if (r < 0 || static_cast<std::size_t>(r) >= p.num_rows)
        fail(ErrorKind::InvalidArgument, "LP column references a missing row");
  }
}

}  // namespace

Solution solve(const Problem& problem, const Options& options) {
  validate(problem);
  RevisedSimplex simplex(problem, options);
  return simplex.run();
}

}  // namespace wass::lp
