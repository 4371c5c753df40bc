#include "wass/sinkhorn.hpp"

#include "wass/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace wass {

SinkhornConfig SinkhornConfig::for_distances(const DistanceMatrix& d, double relative) {
  SinkhornConfig cfg;
  cfg.epsilon = relative * d.mean();
  if (!(cfg.epsilon > 0.0)) cfg.epsilon = relative;
  return cfg;
}

namespace {

void validate(const SinkhornConfig& cfg) {
  if (!(cfg.epsilon > 0.0) || !std::isfinite(cfg.epsilon))
    fail(ErrorKind::InvalidArgument, "sinkhorn epsilon must be > 0");
  if (!(cfg.tol > 0.0)) fail(ErrorKind::InvalidArgument, "sinkhorn tol must be > 0");
  if (cfg.max_iters < 1) fail(ErrorKind::InvalidArgument, "sinkhorn max_iters must be >= 1");
  if (!(cfg.epsilon_schedule > 0.0) || cfg.epsilon_schedule > 1.0)
    fail(ErrorKind::InvalidArgument, "epsilon_schedule must lie in (0, 1]");
  if (cfg.decay_interval < 1) fail(ErrorKind::InvalidArgument, "decay_interval must be >= 1");
}

// out_j = log sum_r exp((f_r - D_rj) / eps)
void column_lse(const Matrix& D, const Vector& f, double eps, Vector& out, Vector& scratch) {
  const Eigen::Index n = D.rows(), m = D.cols();
  out.setConstant(m, -std::numeric_limits<double>::infinity());
  for (Eigen::Index r = 0; r < n; ++r)
    for (Eigen::Index j = 0; j < m; ++j) out[j] = std::max(out[j], f[r] - D(r, j));
  scratch.setZero(m);
  for (Eigen::Index r = 0; r < n; ++r)
    for (Eigen::Index j = 0; j < m; ++j) scratch[j] += std::exp((f[r] - D(r, j) - out[j]) / eps);
  for (Eigen::Index j = 0; j < m; ++j) out[j] = out[j] / eps + std::log(scratch[j]);
}

// out_r = log sum_j exp((g_j - D_rj) / eps)
void row_lse(const Matrix& D, const Vector& g, double eps, Vector& out) {
  const Eigen::Index n = D.rows(), m = D.cols();
  out.resize(n);
  for (Eigen::Index r = 0; r < n; ++r) {
    double mx = -std::numeric_limits<double>::infinity();
    for (Eigen::Index j = 0; j < m; ++j) mx = std::max(mx, g[j] - D(r, j));
    double acc = 0.0;
    for (Eigen::Index j = 0; j < m; ++j) acc += std::exp((g[j] - D(r, j) - mx) / eps);
    out[r] = mx / eps + std::log(acc);
  }
}

class Solver {
 public:
  Solver(const Matrix& D, const ClassPartition& classes)
      : D_(D), classes_(classes), n_(D.rows()), m_(D.cols()),
        f_(Vector::Zero(n_)), g_(Vector::Zero(m_)), log_target_(-std::log(static_cast<double>(m_))) {}

  const Vector& f() const { return f_; }
  const Vector& g() const { return g_; }
  void set(const Vector& f, const Vector& g) { f_ = f; g_ = g; }

  // One log-domain sweep. Returns the column violation of the state on entry.
  double log_step(double eps) {
    column_lse(D_, f_, eps, lse_, scratch_);
    double viol = 0.0;
    for (Eigen::Index j = 0; j < m_; ++j) {
      viol += std::abs(std::exp(g_[j] / eps + lse_[j]) - 1.0 / static_cast<double>(m_));
      g_[j] = eps * (log_target_ - lse_[j]);
    }
    row_lse(D_, g_, eps, lse_);
    for (Eigen::Index r = 0; r < n_; ++r) lse_[r] += f_[r] / eps;
    equalize_rows(eps, lse_, f_);
    return viol;
  }

  // Kernel-domain sweeps on the stabilized kernel exp((f + g - D) / eps).
  // Returns the violation of the last entry state, or -1 if none was measured.
  double kernel_steps(double eps, std::size_t count, double tol, std::size_t& used) {
    Matrix K(n_, m_);
    for (Eigen::Index r = 0; r < n_; ++r)
      for (Eigen::Index j = 0; j < m_; ++j) K(r, j) = std::exp((f_[r] + g_[j] - D_(r, j)) / eps);
    Vector u = Vector::Ones(n_), v = Vector::Ones(m_);
    double viol = -1.0;
    for (used = 0; used < count; ++used) {
      Vector ktu = K.transpose() * u;
      double cur = 0.0;
      for (Eigen::Index j = 0; j < m_; ++j) {
        if (!(ktu[j] > 0.0))
          fail(ErrorKind::NumericalUnderflow,
               "kernel column " + std::to_string(j) + " underflowed to zero; lower epsilon needs the log domain");
        cur += std::abs(v[j] * ktu[j] - 1.0 / static_cast<double>(m_));
      }
      if (used > 0) {
        viol = cur;
        if (viol <= tol) break;
      }
      for (Eigen::Index j = 0; j < m_; ++j) v[j] = 1.0 / (static_cast<double>(m_) * ktu[j]);
      Vector kv = K * v;
      Vector log_s(n_);
      for (Eigen::Index r = 0; r < n_; ++r) {
        double s = u[r] * kv[r];
        if (!(s > 0.0))
          fail(ErrorKind::NumericalUnderflow, "kernel row " + std::to_string(r) + " underflowed to zero");
        log_s[r] = std::log(s);
      }
      Vector shift = Vector::Zero(n_);
      equalize_rows(1.0, log_s, shift);
      for (Eigen::Index r = 0; r < n_; ++r) u[r] *= std::exp(shift[r]);
    }
    for (Eigen::Index r = 0; r < n_; ++r) f_[r] += eps * std::log(u[r]);
    for (Eigen::Index j = 0; j < m_; ++j) g_[j] += eps * std::log(v[j]);
    return viol;
  }

  double column_violation(double eps) {
    column_lse(D_, f_, eps, lse_, scratch_);
    double viol = 0.0;
    for (Eigen::Index j = 0; j < m_; ++j)
      viol += std::abs(std::exp(g_[j] / eps + lse_[j]) - 1.0 / static_cast<double>(m_));
    return viol;
  }

  Matrix plan(double eps) const {
    Matrix P(n_, m_);
    for (Eigen::Index r = 0; r < n_; ++r)
      for (Eigen::Index j = 0; j < m_; ++j) P(r, j) = std::exp((f_[r] + g_[j] - D_(r, j)) / eps);
    return P;
  }

 private:
  // Given log row sums, shifts potentials (in units of eps) so that rows in a
  // class share the geometric mean of their sums and the total mass is 1.
  void equalize_rows(double eps, const Vector& log_rows, Vector& potential) {
    const std::size_t k = classes_.num_classes();
    std::vector<double> mean(k, 0.0);
    for (Eigen::Index r = 0; r < n_; ++r) mean[static_cast<std::size_t>(classes_.row_class[static_cast<std::size_t>(r)])] += log_rows[r];
    double mx = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < k; ++i) {
      mean[i] /= static_cast<double>(classes_.counts[i]);
      mx = std::max(mx, mean[i]);
    }
    double total = 0.0;
    for (std::size_t i = 0; i < k; ++i) total += static_cast<double>(classes_.counts[i]) * std::exp(mean[i] - mx);
    const double log_total = mx + std::log(total);
    for (Eigen::Index r = 0; r < n_; ++r) {
      auto c = static_cast<std::size_t>(classes_.row_class[static_cast<std::size_t>(r)]);
      potential[r] += eps * (mean[c] - log_rows[r] - log_total);
    }
  }

  const Matrix& D_;
  const ClassPartition& classes_;
  Eigen::Index n_, m_;
  Vector f_, g_;
  Vector lse_, scratch_;
  double log_target_;
};

}  // namespace

Matrix round_to_class_feasible(const Matrix& plan, const ClassPartition& classes) {
  if (static_cast<std::size_t>(plan.rows()) != classes.num_rows())
    fail(ErrorKind::DimensionMismatch, "plan rows do not match the class partition");
  const Eigen::Index n = plan.rows(), m = plan.cols();
  const double col_target = 1.0 / static_cast<double>(m);
  Matrix Q = plan.cwiseMax(0.0);
  for (Eigen::Index j = 0; j < m; ++j) {
    double c = Q.col(j).sum();
    if (c > 0.0) Q.col(j) *= col_target / c;
  }
  Vector rows = Q.rowwise().sum();
  const std::size_t k = classes.num_classes();
  std::vector<double> mass(k, 0.0);
  for (Eigen::Index r = 0; r < n; ++r) mass[static_cast<std::size_t>(classes.row_class[static_cast<std::size_t>(r)])] += rows[r];
  double total = 0.0;
  for (double x : mass) total += x;
  Vector target(n);
  for (Eigen::Index r = 0; r < n; ++r) {
    auto c = static_cast<std::size_t>(classes.row_class[static_cast<std::size_t>(r)]);
    double share = total > 0.0 ? mass[c] / total : 1.0 / static_cast<double>(k);
    target[r] = share / static_cast<double>(classes.counts[c]);
  }
  for (Eigen::Index r = 0; r < n; ++r)
    if (rows[r] > target[r]) Q.row(r) *= target[r] / rows[r];
  Vector err_r = (target - Q.rowwise().sum()).cwiseMax(0.0);
  Vector err_c = (Vector::Constant(m, col_target) - Q.colwise().sum().transpose()).cwiseMax(0.0);
  double s = err_c.sum();
  if (s > 0.0) Q.noalias() += err_r * err_c.transpose() / s;
  return Q;
}

ClassWeightSolution sinkhorn_class_weights(const DistanceMatrix& distances,
                                           const ClassPartition& classes,
                                           const SinkhornConfig& config) {
  validate(config);
  if (classes.num_classes() == 0) fail(ErrorKind::InvalidArgument, "need at least one class");
  if (classes.num_rows() != distances.rows())
    fail(ErrorKind::DimensionMismatch, "class partition does not match the distance matrix");
  const Matrix& D = distances.values();
  const double kernel_threshold = 1e-2 * distances.max();

  Solver solver(D, classes);
  double eps = config.epsilon;
  if (config.epsilon_schedule < 1.0) eps = std::max(config.epsilon, distances.mean());

  std::size_t iters = 0;
  double best = std::numeric_limits<double>::infinity();
  Vector best_f, best_g;
  bool converged = false;

  while (iters < config.max_iters) {
    const bool final_stage = eps <= config.epsilon;
    const std::size_t budget =
        final_stage ? config.max_iters - iters : std::min(config.decay_interval, config.max_iters - iters);
    const bool kernel = config.force_kernel || eps >= kernel_threshold;
    if (kernel) {
      std::size_t used = 0;
      double viol = solver.kernel_steps(eps, budget, config.tol, used);
      iters += used;
      if (final_stage) {
        if (viol < 0.0) viol = solver.column_violation(eps);
        if (viol < best) {
          best = viol;
          best_f = solver.f();
          best_g = solver.g();
        }
        converged = viol <= config.tol;
        if (converged) break;
        if (used == 0) break;
      }
    } else {
      for (std::size_t s = 0; s < budget; ++s, ++iters) {
        Vector f0 = solver.f(), g0 = solver.g();
        double viol = solver.log_step(eps);
        if (s == 0) continue;  // entry state was not row-equalized at this eps
        if (final_stage && viol < best) {
          best = viol;
          best_f = std::move(f0);
          best_g = std::move(g0);
        }
        if (viol <= config.tol) {
          if (final_stage) converged = true;
          ++iters;
          break;
        }
      }
      if (final_stage) {
        if (!converged) {
          double viol = solver.column_violation(eps);
          if (viol < best) {
            best = viol;
            best_f = solver.f();
            best_g = solver.g();
          }
        }
        break;
      }
    }
    if (final_stage) break;
    eps = std::max(config.epsilon, eps * config.epsilon_schedule);
  }
  eps = config.epsilon;
  if (best_f.size() == 0) {
    best = solver.column_violation(eps);
    best_f = solver.f();
    best_g = solver.g();
  }
  solver.set(best_f, best_g);

  Matrix rounded = round_to_class_feasible(solver.plan(eps), classes);
  const std::size_t n = distances.rows(), m = distances.cols(), k = classes.num_classes();
  Vector rows = rounded.rowwise().sum();
  std::vector<double> w(k, 0.0);
  for (std::size_t r = 0; r < n; ++r) w[static_cast<std::size_t>(classes.row_class[r])] += rows[static_cast<Eigen::Index>(r)];
  double wsum = 0.0;
  for (double x : w) wsum += x;
  for (double& x : w) x /= wsum;

  TransportPlan plan;
  plan.plan = std::move(rounded);
  plan.source_marginal = rows;
  plan.target_marginal = Vector::Constant(static_cast<Eigen::Index>(m), 1.0 / static_cast<double>(m));
  plan.objective = plan.plan.cwiseProduct(D).sum();

  // Lower bound from the row potentials: feasible dual after the same repair
  // used for the exact solver.
  Vector u = best_f;
  std::vector<double> sums(k, 0.0);
  for (std::size_t r = 0; r < n; ++r) sums[static_cast<std::size_t>(classes.row_class[r])] += u[static_cast<Eigen::Index>(r)];
  for (std::size_t r = 0; r < n; ++r) {
    auto c = static_cast<std::size_t>(classes.row_class[r]);
    if (sums[c] < 0.0) u[static_cast<Eigen::Index>(r)] -= sums[c] / static_cast<double>(classes.counts[c]);
  }
  double dual = 0.0;
  for (std::size_t j = 0; j < m; ++j) dual += (D.col(static_cast<Eigen::Index>(j)) - u).minCoeff();
  dual /= static_cast<double>(m);

  ClassWeights weights(w);
  ClassWeightSolution out{weights, std::move(plan), 0.0, 0, 0.0, 0.0, 0, converged, "sinkhorn", {}};
  out.objective = out.plan.objective;
  out.support_size = weights.support().size();
  out.dual_objective = dual;
  out.duality_gap = out.objective - dual;
  out.iterations = iters;
  if (!converged && best > 10.0 * config.tol) {
    std::ostringstream msg;
    msg << "sinkhorn did not converge: marginal violation " << best << " after " << iters
        << " iterations (tol " << config.tol << ")";
    out.warnings.push_back(msg.str());
  }
  return out;
}

}  // namespace wass
