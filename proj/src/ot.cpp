#include "wass/ot.hpp"

#include "wass/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <vector>

namespace wass {

namespace {

struct Arc {
  int row;
  int col;
  double flow;
};

// Spanning-tree basis over n row nodes followed by m column nodes.
class TransportationSimplex {
 public:
  TransportationSimplex(const Matrix& cost, const Vector& supply, const Vector& demand,
                        const OtOptions& opt)
      : c_(cost), n_(static_cast<int>(cost.rows())), m_(static_cast<int>(cost.cols())), opt_(opt) {
    a_ = supply;
    b_ = demand;
    double shift = 0.0;
    for (int i = 0; i < n_; ++i) {
      a_[i] += opt.perturbation * (i + 1);
      shift += opt.perturbation * (i + 1);
    }
    b_[m_ - 1] += shift + (supply.sum() - demand.sum());
    u_.resize(n_);
    v_.resize(m_);
    adj_.assign(static_cast<std::size_t>(n_ + m_), {});
    tol_ = 1e-12 * (1.0 + c_.cwiseAbs().maxCoeff());
    max_iter_ = opt.max_iterations
                    ? opt.max_iterations
                    : 20 * static_cast<std::size_t>(n_) * static_cast<std::size_t>(m_) + 1000;
  }

  void run() {
    northwest_corner();
    std::vector<int> path;
    while (true) {
      compute_potentials();
      int ei = -1, ej = -1;
      find_entering(ei, ej);
      if (ei < 0) return;
      if (iterations_ >= max_iter_)
        fail(ErrorKind::SolverFailure, "transportation simplex hit its iteration cap");
      tree_path(ei, n_ + ej, path);
      pivot(ei, ej, path);
    }
  }

  /// Basic flows for the exact marginals on the final tree (leaf peeling).
  Matrix exact_plan(const Vector& supply, const Vector& demand) const {
    std::vector<double> rem(static_cast<std::size_t>(n_ + m_));
    for (int i = 0; i < n_; ++i) rem[static_cast<std::size_t>(i)] = supply[i];
    for (int j = 0; j < m_; ++j) rem[static_cast<std::size_t>(n_ + j)] = demand[j];
    std::vector<int> degree(static_cast<std::size_t>(n_ + m_));
    for (int node = 0; node < n_ + m_; ++node)
      degree[static_cast<std::size_t>(node)] = static_cast<int>(adj_[static_cast<std::size_t>(node)].size());
    std::vector<char> done(arcs_.size(), 0);
    std::vector<int> leaves;
    for (int node = 0; node < n_ + m_; ++node)
      if (degree[static_cast<std::size_t>(node)] == 1) leaves.push_back(node);

    Matrix plan = Matrix::Zero(n_, m_);
    while (!leaves.empty()) {
      int leaf = leaves.back();
      leaves.pop_back();
      if (degree[static_cast<std::size_t>(leaf)] != 1) continue;
      int arc_id = -1;
      for (int id : adj_[static_cast<std::size_t>(leaf)])
        if (!done[static_cast<std::size_t>(id)]) arc_id = id;
      const Arc& arc = arcs_[static_cast<std::size_t>(arc_id)];
      int other = leaf < n_ ? n_ + arc.col : arc.row;
      double flow = rem[static_cast<std::size_t>(leaf)];
      plan(arc.row, arc.col) = std::max(flow, 0.0);
      rem[static_cast<std::size_t>(other)] -= flow;
      rem[static_cast<std::size_t>(leaf)] = 0.0;
      done[static_cast<std::size_t>(arc_id)] = 1;
      degree[static_cast<std::size_t>(leaf)] = 0;
      if (--degree[static_cast<std::size_t>(other)] == 1) leaves.push_back(other);
    }
    return plan;
  }

  const Vector& u() const { return u_; }
  std::size_t iterations() const { return iterations_; }

 private:
  void add_arc(int i, int j, double flow) {
    int id = static_cast<int>(arcs_.size());
    arcs_.push_back({i, j, flow});
    adj_[static_cast<std::size_t>(i)].push_back(id);
    adj_[static_cast<std::size_t>(n_ + j)].push_back(id);
  }

  void northwest_corner() {
    Vector ra = a_, rb = b_;
    int i = 0, j = 0;
    while (true) {
      double f = std::max(0.0, std::min(ra[i], rb[j]));
      add_arc(i, j, f);
      ra[i] -= f;
      rb[j] -= f;
      if (i == n_ - 1 && j == m_ - 1) break;
      if (i == n_ - 1) ++j;
      else if (j == m_ - 1) ++i;
      else if (ra[i] <= rb[j]) ++i;
      else ++j;
    }
  }

  void compute_potentials() {
    std::vector<char> known(static_cast<std::size_t>(n_ + m_), 0);
    std::vector<int> stack{0};
    u_[0] = 0.0;
    known[0] = 1;
    while (!stack.empty()) {
      int node = stack.back();
      stack.pop_back();
      for (int id : adj_[static_cast<std::size_t>(node)]) {
        const Arc& arc = arcs_[static_cast<std::size_t>(id)];
        int other = node < n_ ? n_ + arc.col : arc.row;
        if (known[static_cast<std::size_t>(other)]) continue;
        if (node < n_) v_[arc.col] = c_(arc.row, arc.col) - u_[arc.row];
        else u_[arc.row] = c_(arc.row, arc.col) - v_[arc.col];
        known[static_cast<std::size_t>(other)] = 1;
        stack.push_back(other);
      }
    }
  }

  void find_entering(int& ei, int& ej) const {
    const bool bland = streak_ > opt_.bland_after;
    double best = -tol_;
    for (int i = 0; i < n_; ++i) {
      for (int j = 0; j < m_; ++j) {
        double rc = c_(i, j) - u_[i] - v_[j];
        if (rc < best) {
          best = rc;
          ei = i;
          ej = j;
          if (bland) return;
        }
      }
    }
  }

  // Arc ids on the tree path from `to` back to `from`, listed starting at `to`.
  void tree_path(int from, int to, std::vector<int>& path) const {
    std::vector<int> parent_arc(static_cast<std::size_t>(n_ + m_), -1);
    std::vector<char> seen(static_cast<std::size_t>(n_ + m_), 0);
    std::vector<int> queue{from};
    seen[static_cast<std::size_t>(from)] = 1;
    for (std::size_t head = 0; head < queue.size(); ++head) {
      int node = queue[head];
      if (node == to) break;
      for (int id : adj_[static_cast<std::size_t>(node)]) {
        const Arc& arc = arcs_[static_cast<std::size_t>(id)];
        int other = node < n_ ? n_ + arc.col : arc.row;
        if (seen[static_cast<std::size_t>(other)]) continue;
        seen[static_cast<std::size_t>(other)] = 1;
        parent_arc[static_cast<std::size_t>(other)] = id;
        queue.push_back(other);
      }
    }
    path.clear();
    for (int node = to; node != from;) {
      int id = parent_arc[static_cast<std::size_t>(node)];
      path.push_back(id);
      const Arc& arc = arcs_[static_cast<std::size_t>(id)];
      node = node < n_ ? n_ + arc.col : arc.row;
    }
  }

  void pivot(int ei, int ej, const std::vector<int>& path) {
    const bool bland = streak_ > opt_.bland_after;
    int leave = -1;
    double theta = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < path.size(); k += 2) {
      const Arc& arc = arcs_[static_cast<std::size_t>(path[k])];
      bool better = arc.flow < theta;
      if (bland && leave >= 0 && arc.flow == theta) {
        const Arc& cur = arcs_[static_cast<std::size_t>(leave)];
        better = std::pair(arc.row, arc.col) < std::pair(cur.row, cur.col);
      }
      if (better) {
        theta = arc.flow;
        leave = path[k];
      }
    }
    theta = std::max(theta, 0.0);
    for (std::size_t k = 0; k < path.size(); ++k) {
      Arc& arc = arcs_[static_cast<std::size_t>(path[k])];
      arc.flow += (k % 2 == 0) ? -theta : theta;
    }
    // Replace the leaving arc in place by the entering one.
    Arc& old = arcs_[static_cast<std::size_t>(leave)];
    auto detach = [&](int node) {
      auto& list = adj_[static_cast<std::size_t>(node)];
      list.erase(std::find(list.begin(), list.end(), leave));
    };
    detach(old.row);
    detach(n_ + old.col);
    old = {ei, ej, theta};
    adj_[static_cast<std::size_t>(ei)].push_back(leave);
    adj_[static_cast<std::size_t>(n_ + ej)].push_back(leave);

    ++iterations_;
    if (theta <= 1e-18) ++streak_;
    else streak_ = 0;
  }

  const Matrix& c_;
  int n_;
  int m_;
  const OtOptions& opt_;
  Vector a_;
  Vector b_;
  Vector u_;
  Vector v_;
  std::vector<Arc> arcs_;
  std::vector<std::vector<int>> adj_;
  double tol_ = 0.0;
  std::size_t iterations_ = 0;
  std::size_t streak_ = 0;
  std::size_t max_iter_ = 0;
};

void check_marginal(const Vector& x, const char* name, std::size_t expected) {
  if (static_cast<std::size_t>(x.size()) != expected)
    fail(ErrorKind::DimensionMismatch, std::string(name) + " has the wrong length");
  if (!x.allFinite() || (x.size() && x.minCoeff() < 0.0))
    fail(ErrorKind::InfeasibleMarginals, std::string(name) + " must be finite and nonnegative");
  if (std::abs(x.sum() - 1.0) > kSimplexSumTolerance)
    fail(ErrorKind::InfeasibleMarginals, std::string(name) + " does not sum to 1");
}

Matrix stacked_features(const DiscreteJointDistribution& p) {
  Matrix out(static_cast<Eigen::Index>(p.size()), static_cast<Eigen::Index>(p.dim()));
  for (std::size_t i = 0; i < p.size(); ++i)
    out.row(static_cast<Eigen::Index>(i)) = p.atoms()[i].feature.transpose();
  return out;
}

Vector masses(const DiscreteJointDistribution& p) {
  Vector out(static_cast<Eigen::Index>(p.size()));
  for (std::size_t i = 0; i < p.size(); ++i) out[static_cast<Eigen::Index>(i)] = p.atoms()[i].mass;
  return out;
}

Matrix feature_cost(const DiscreteJointDistribution& p, const DiscreteJointDistribution& q) {
  if (p.dim() != q.dim()) fail(ErrorKind::DimensionMismatch, "joint distributions differ in dimension");
  return pairwise_distances(FeatureMatrix(stacked_features(p)), FeatureMatrix(stacked_features(q)))
      .values();
}

struct FeatureLess {
  bool operator()(const Vector& a, const Vector& b) const {
    return std::lexicographical_compare(a.data(), a.data() + a.size(), b.data(), b.data() + b.size());
  }
};

// feature vector -> (label -> mass)
using Conditionals = std::map<Vector, std::map<ClassId, double>, FeatureLess>;

Conditionals group_by_feature(const DiscreteJointDistribution& p) {
  Conditionals out;
  for (const auto& a : p.atoms()) {
    if (a.mass <= 0.0) continue;
    out[a.feature][a.label] += a.mass;
  }
  return out;
}

double label_wasserstein(const std::map<ClassId, double>& p, const std::map<ClassId, double>& q) {
  std::vector<ClassId> lp, lq;
  Vector mp(static_cast<Eigen::Index>(p.size())), mq(static_cast<Eigen::Index>(q.size()));
  double sp = 0.0, sq = 0.0;
  for (const auto& [y, m] : p) sp += m;
  for (const auto& [y, m] : q) sq += m;
  for (const auto& [y, m] : p) {
    mp[static_cast<Eigen::Index>(lp.size())] = m / sp;
    lp.push_back(y);
  }
  for (const auto& [y, m] : q) {
    mq[static_cast<Eigen::Index>(lq.size())] = m / sq;
    lq.push_back(y);
  }
  Matrix cost(mp.size(), mq.size());
  for (std::size_t i = 0; i < lp.size(); ++i)
    for (std::size_t j = 0; j < lq.size(); ++j)
      cost(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = lp[i] == lq[j] ? 0.0 : 1.0;
  mp /= mp.sum();
  mq /= mq.sum();
  return solve_exact_ot({cost, mp, mq}).plan.objective;
}

}  // namespace

Vector uniform_marginal(std::size_t n) {
  if (n == 0) fail(ErrorKind::InvalidArgument, "marginal needs at least one atom");
  return Vector::Constant(static_cast<Eigen::Index>(n), 1.0 / static_cast<double>(n));
}

OtResult solve_exact_ot(const OtProblem& problem, const OtOptions& options) {
  const Matrix& c = problem.cost;
  if (c.rows() < 1 || c.cols() < 1) fail(ErrorKind::InvalidArgument, "empty cost matrix");
  if (!c.allFinite()) fail(ErrorKind::NonFiniteValue, "cost matrix");
  check_marginal(problem.mu, "mu", static_cast<std::size_t>(c.rows()));
  check_marginal(problem.nu, "nu", static_cast<std::size_t>(c.cols()));

  TransportationSimplex simplex(c, problem.mu, problem.nu, options);
  simplex.run();

  OtResult out;
  out.iterations = simplex.iterations();
  out.plan.plan = simplex.exact_plan(problem.mu, problem.nu);
  out.plan.source_marginal = problem.mu;
  out.plan.target_marginal = problem.nu;
  out.plan.objective = out.plan.plan.cwiseProduct(c).sum();

  out.u = simplex.u();
  out.v.resize(c.cols());
  for (Eigen::Index j = 0; j < c.cols(); ++j) out.v[j] = (c.col(j) - out.u).minCoeff();
  out.dual_objective = problem.mu.dot(out.u) + problem.nu.dot(out.v);
  out.duality_gap = out.plan.objective - out.dual_objective;
  return out;
}

double wasserstein1(const Matrix& cost, const Vector& mu, const Vector& nu) {
  return solve_exact_ot({cost, mu, nu}).plan.objective;
}

double wasserstein1(const FeatureMatrix& a, const Vector& mu, const FeatureMatrix& b,
                    const Vector& nu) {
  return wasserstein1(pairwise_distances(a, b).values(), mu, nu);
}

double joint_wasserstein(const DiscreteJointDistribution& p, const DiscreteJointDistribution& q,
                         double label_cost) {
  if (!(label_cost >= 0.0) || !std::isfinite(label_cost))
    fail(ErrorKind::InvalidArgument, "label_cost must be a nonnegative number");
  Matrix cost = feature_cost(p, q);
  for (std::size_t i = 0; i < p.size(); ++i)
    for (std::size_t j = 0; j < q.size(); ++j)
      if (p.atoms()[i].label != q.atoms()[j].label)
        cost(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) += label_cost;
  Vector mp = masses(p), mq = masses(q);
  return solve_exact_ot({cost, mp / mp.sum(), mq / mq.sum()}).plan.objective;
}

double marginal_wasserstein(const DiscreteJointDistribution& p, const DiscreteJointDistribution& q) {
  Vector mp = masses(p), mq = masses(q);
  return solve_exact_ot({feature_cost(p, q), mp / mp.sum(), mq / mq.sum()}).plan.objective;
}

double conditional_wasserstein_term(const DiscreteJointDistribution& p,
                                    const DiscreteJointDistribution& q,
                                    ConditionalWeighting weighting) {
  if (p.dim() != q.dim()) fail(ErrorKind::DimensionMismatch, "joint distributions differ in dimension");
  Conditionals gp = group_by_feature(p);
  Conditionals gq = group_by_feature(q);
  const Conditionals& outer = weighting == ConditionalWeighting::Source ? gp : gq;
  const Conditionals& other = weighting == ConditionalWeighting::Source ? gq : gp;
  double total = 0.0;
  for (const auto& [z, labels] : outer) {
    auto it = other.find(z);
    if (it == other.end())
      fail(ErrorKind::SupportMismatch, "a feature atom of the weighting marginal is missing from the other distribution");
    double mass = 0.0;
    for (const auto& [y, m] : labels) mass += m;
    const auto& pz = weighting == ConditionalWeighting::Source ? labels : it->second;
    const auto& qz = weighting == ConditionalWeighting::Source ? it->second : labels;
    total += mass * label_wasserstein(pz, qz);
  }
  return total;
}

}  // namespace wass
