#include "wass/bounds.hpp"

#include "wass/error.hpp"
#include "wass/ot.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <random>

namespace wass {

double softmax_lipschitz_constant(std::size_t K) {
  if (K < 2) fail(ErrorKind::InvalidK, "softmax Lipschitz constant needs K >= 2, got " + std::to_string(K));
  return std::sqrt(static_cast<double>(K - 1)) / static_cast<double>(K);
}

namespace {

Vector softmax(const Vector& v) {
  Vector e = (v.array() - v.maxCoeff()).exp().matrix();
  return e / e.sum();
}

}  // namespace

double verify_softmax_lipschitz(std::size_t K, std::size_t trials, std::uint64_t seed) {
  if (K < 2) fail(ErrorKind::InvalidK, "K must be >= 2");
  if (trials < 1) fail(ErrorKind::InvalidArgument, "trials must be >= 1");
  static constexpr double kScales[] = {0.1, 1.0, 10.0};
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector v(static_cast<Eigen::Index>(K)), w(static_cast<Eigen::Index>(K));
  double best = 0.0;
  for (std::size_t t = 0; t < trials; ++t) {
    const double s = kScales[t % 3];
    for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = s * normal(rng);
    for (Eigen::Index i = 0; i < w.size(); ++i) w[i] = s * normal(rng);
    const double d = (v - w).norm();
    if (d < 1e-12) continue;
    best = std::max(best, (softmax(v) - softmax(w)).lpNorm<1>() / d);
  }
  return best;
}

SingularValueEstimate largest_singular_value(const Matrix& M) {
  if (!M.allFinite()) fail(ErrorKind::NonFiniteValue, "matrix has non-finite entries");
  SingularValueEstimate out;
  if (M.size() == 0 || M.cwiseAbs().maxCoeff() == 0.0) return out;
  const Eigen::Index n = M.cols();
  const Matrix A = M.transpose() * M;
  constexpr std::size_t kCap = 100000;

  // Start vectors: all ones, then deterministic non-uniform fallbacks in case
  // the iteration collapses to zero.
  for (int attempt = 0; attempt < 3; ++attempt) {
    Vector x(n);
    for (Eigen::Index i = 0; i < n; ++i)
      x[i] = attempt == 0 ? 1.0 : attempt == 1 ? static_cast<double>(i + 1) : std::sin(static_cast<double>(i) + 0.5);
    x.normalize();
    double prev = -1.0;
    bool collapsed = false;
    for (std::size_t it = 1; it <= kCap; ++it) {
      Vector y = A * x;
      const double norm = y.norm();
      if (norm == 0.0) {
        collapsed = true;
        break;
      }
      x = y / norm;
      double est = (M * x).norm();
      out.iterations = it;
      out.value = std::max(out.value, est);
      if (prev >= 0.0 && std::abs(est - prev) <= 1e-12 * est) {
        // Polish: a few more steps until the estimate stops moving, so exact
        // cases such as diagonal matrices land on the exact value.
        for (std::size_t extra = 0; extra < 200 && it + extra < kCap; ++extra) {
          Vector z = A * x;
          const double zn = z.norm();
          if (zn == 0.0) break;
          x = z / zn;
          const double next = (M * x).norm();
          out.iterations = it + extra + 1;
          if (next == est) break;
          est = next;
        }
        out.value = est;
        out.converged = true;
        return out;
      }
      prev = est;
    }
    if (!collapsed) {
      out.converged = false;
      return out;
    }
  }
  out.converged = false;
  return out;
}

double induced_error(const Matrix& probs, std::span<const int> labels) {
  std::vector<double> masses(labels.size(), labels.empty() ? 0.0 : 1.0 / static_cast<double>(labels.size()));
  return induced_error(probs, labels, masses);
}

double induced_error(const Matrix& probs, std::span<const int> labels, std::span<const double> masses) {
  if (static_cast<std::size_t>(probs.rows()) != labels.size() || labels.size() != masses.size())
    fail(ErrorKind::DimensionMismatch, "probabilities, labels and masses must have the same length");
  if (labels.empty()) fail(ErrorKind::InvalidArgument, "no samples");
  double total = 0.0, mass = 0.0;
  for (Eigen::Index i = 0; i < probs.rows(); ++i) {
    const auto row = probs.row(i);
    if (row.minCoeff() < -1e-12 || std::abs(row.sum() - 1.0) > 1e-8)
      fail(ErrorKind::RowNotSimplex, "row " + std::to_string(i) + " is not a probability vector");
    const int y = labels[static_cast<std::size_t>(i)];
    if (y >= probs.cols()) fail(ErrorKind::UnknownLabel, "label outside the probability columns");
    double l1 = row.cwiseAbs().sum();
    if (y >= 0) l1 += std::abs(1.0 - row(y)) - std::abs(row(y));
    else l1 += 1.0;
    total += masses[static_cast<std::size_t>(i)] * 0.5 * l1;
    mass += masses[static_cast<std::size_t>(i)];
  }
  return total / mass;
}

RhoEstimate estimate_rho(const SoftmaxHead& head, const Matrix& features) {
  const Matrix P = head.predict_proba(features);
  RhoEstimate est;
  bool any = false;
  for (Eigen::Index i = 0; i < features.rows(); ++i)
    for (Eigen::Index j = i + 1; j < features.rows(); ++j) {
      const double d = (features.row(i) - features.row(j)).norm();
      if (d < 1e-12) continue;
      any = true;
      est.lower = std::max(est.lower, (P.row(i) - P.row(j)).lpNorm<1>() / d);
    }
  if (!any) fail(ErrorKind::InsufficientSamples, "need two distinct feature rows to estimate rho");
  const double alpha = head.num_classes() >= 2 ? softmax_lipschitz_constant(head.num_classes()) : 0.0;
  est.upper = alpha * largest_singular_value(head.weights()).value;
  return est;
}

namespace {

struct JointView {
  Matrix features;
  std::vector<int> rows;  // head row per atom, -1 if absent
  std::vector<double> masses;
};

JointView view(const DiscreteJointDistribution& d, const SoftmaxHead& head) {
  JointView v;
  v.features.resize(static_cast<Eigen::Index>(d.size()), static_cast<Eigen::Index>(d.dim()));
  for (std::size_t i = 0; i < d.size(); ++i) {
    const auto& a = d.atoms()[i];
    v.features.row(static_cast<Eigen::Index>(i)) = a.feature.transpose();
    v.rows.push_back(head.index_of(a.label));
    v.masses.push_back(a.mass);
  }
  return v;
}

double head_error(const SoftmaxHead& head, const JointView& v) {
  return induced_error(head.predict_proba(v.features), v.rows, v.masses);
}

}  // namespace

InequalityCheck check_error_difference_bound(const DiscreteJointDistribution& p,
                                             const DiscreteJointDistribution& q, const SoftmaxHead& head) {
  if (p.dim() != q.dim() || p.dim() != head.dim())
    fail(ErrorKind::DimensionMismatch, "distributions and head must share the feature dimension");
  const JointView vp = view(p, head), vq = view(q, head);
  InequalityCheck c;
  c.lhs = std::abs(head_error(head, vp) - head_error(head, vq));
  const double alpha = head.num_classes() >= 2 ? softmax_lipschitz_constant(head.num_classes()) : 0.0;
  const double rho = alpha * largest_singular_value(head.weights()).value;
  c.rhs = std::max(rho, 1.0) * joint_wasserstein(p, q, 1.0);
  c.holds = c.lhs <= c.rhs + 1e-9;
  return c;
}

InequalityCheck check_decomposition(const DiscreteJointDistribution& p, const DiscreteJointDistribution& q) {
  InequalityCheck c;
  c.lhs = joint_wasserstein(p, q, 1.0);
  c.rhs = marginal_wasserstein(p, q) + std::min(conditional_wasserstein_term(p, q, ConditionalWeighting::Source),
                                                conditional_wasserstein_term(p, q, ConditionalWeighting::Target));
  c.holds = c.lhs <= c.rhs + 1e-7;
  return c;
}

double assemble_transfer_bound(double eps_source_pretrained, double w1, double rho, double alpha, double beta,
                               double sigma_max_diff) {
  for (double x : {eps_source_pretrained, w1, rho, alpha, beta, sigma_max_diff})
    if (!std::isfinite(x)) fail(ErrorKind::NonFiniteValue, "bound inputs must be finite");
  if (w1 < 0.0 || rho < 0.0 || alpha < 0.0 || beta < 0.0 || sigma_max_diff < 0.0)
    fail(ErrorKind::InvalidArgument, "bound inputs must be nonnegative");
  if (eps_source_pretrained < 0.0 || eps_source_pretrained > 1.0)
    fail(ErrorKind::InvalidArgument, "eps_source must lie in [0, 1]");
  return eps_source_pretrained + std::max(rho, 1.0) * w1 + alpha * beta * sigma_max_diff;
}

double beta_bound(const Matrix& features) {
  if (features.rows() == 0) fail(ErrorKind::InvalidArgument, "no feature rows");
  return features.rowwise().norm().maxCoeff();
}

SoftmaxHead lift_head(const SoftmaxHead& head, const std::vector<ClassId>& classes) {
  Matrix w = Matrix::Zero(static_cast<Eigen::Index>(classes.size()), static_cast<Eigen::Index>(head.dim()));
  for (std::size_t i = 0; i < head.num_classes(); ++i) {
    auto it = std::find(classes.begin(), classes.end(), head.classes()[i]);
    if (it == classes.end()) fail(ErrorKind::InvalidArgument, "lifted class list must contain every head class");
    w.row(it - classes.begin()) = head.weights().row(static_cast<Eigen::Index>(i));
  }
  return SoftmaxHead(std::move(w), classes);
}

BoundReport transfer_bound_report(const SoftmaxHead& pretrained, const SoftmaxHead& finetuned,
                                  const DiscreteJointDistribution& source,
                                  const DiscreteJointDistribution& target) {
  if (pretrained.dim() != finetuned.dim() || source.dim() != pretrained.dim() || target.dim() != pretrained.dim())
    fail(ErrorKind::DimensionMismatch, "heads and distributions must share the feature dimension");
  std::vector<ClassId> classes = pretrained.classes();
  for (ClassId id : finetuned.classes())
    if (std::find(classes.begin(), classes.end(), id) == classes.end()) classes.push_back(id);
  const SoftmaxHead hs = lift_head(pretrained, classes), ht = lift_head(finetuned, classes);
  const JointView vs = view(source, hs), vt = view(target, hs);

  BoundReport r;
  r.num_classes = classes.size();
  r.alpha = classes.size() >= 2 ? softmax_lipschitz_constant(classes.size()) : 0.0;
  r.eps_source = head_error(hs, vs);
  r.eps_target = head_error(ht, vt);
  {
    std::vector<int> pred(vt.rows.size());
    const Matrix logits = ht.logits(vt.features);
    double wrong = 0.0, mass = 0.0;
    for (Eigen::Index i = 0; i < logits.rows(); ++i) {
      Eigen::Index best = 0;
      for (Eigen::Index c = 1; c < logits.cols(); ++c)
        if (logits(i, c) > logits(i, best)) best = c;
      if (best != vt.rows[static_cast<std::size_t>(i)]) wrong += vt.masses[static_cast<std::size_t>(i)];
      mass += vt.masses[static_cast<std::size_t>(i)];
    }
    r.eps_target_zero_one = wrong / mass;
  }
  r.w1_joint = joint_wasserstein(source, target, 1.0);
  r.w1_marginal = marginal_wasserstein(source, target);
  try {
    r.cond_term_source = conditional_wasserstein_term(source, target, ConditionalWeighting::Source);
    r.cond_term_target = conditional_wasserstein_term(source, target, ConditionalWeighting::Target);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::SupportMismatch) throw;
  }
  Matrix all(vs.features.rows() + vt.features.rows(), vs.features.cols());
  all << vs.features, vt.features;
  r.beta = beta_bound(all);
  const RhoEstimate rho = estimate_rho(hs, all);
  r.rho_hat = rho.lower;
  r.rho_upper = rho.upper;
  r.sigma_max_diff = largest_singular_value(hs.weights() - ht.weights()).value;
  r.bound_value = assemble_transfer_bound(r.eps_source, r.w1_joint, r.rho_upper, r.alpha, r.beta, r.sigma_max_diff);
  r.holds = r.eps_target <= r.bound_value;
  const double with_pre = r.eps_source + head_error(hs, vt);
  const double with_fine = head_error(ht, vs) + r.eps_target;
  r.lambda_hat = std::min(with_pre, with_fine);
  return r;
}

std::string bound_report_json(const BoundReport& r) {
  nlohmann::ordered_json j;
  j["eps_source"] = r.eps_source;
  j["eps_target"] = r.eps_target;
  j["eps_target_zero_one"] = r.eps_target_zero_one;
  j["w1_marginal"] = r.w1_marginal;
  j["w1_joint"] = r.w1_joint;
  j["cond_term_source"] = r.cond_term_source ? nlohmann::ordered_json(*r.cond_term_source) : nlohmann::ordered_json();
  j["cond_term_target"] = r.cond_term_target ? nlohmann::ordered_json(*r.cond_term_target) : nlohmann::ordered_json();
  j["rho_hat"] = r.rho_hat;
  j["rho_upper"] = r.rho_upper;
  j["alpha"] = r.alpha;
  j["beta"] = r.beta;
  j["sigma_max_diff"] = r.sigma_max_diff;
  j["bound_value"] = r.bound_value;
  j["holds"] = r.holds;
  j["lambda_hat_empirical"] = r.lambda_hat;
  j["num_classes"] = r.num_classes;
  return j.dump(2);
}

}  // namespace wass
