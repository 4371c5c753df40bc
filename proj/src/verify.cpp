#include "wass/verify.hpp"

#include "wass/bounds.hpp"
#include "wass/class_weights.hpp"
#include "wass/head.hpp"
#include "wass/ot.hpp"
#include "wass/sinkhorn.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <random>

namespace wass {

bool VerifyReport::all_pass() const {
  return std::all_of(suites.begin(), suites.end(), [](const SuiteResult& s) { return s.pass(); });
}

namespace {

using Rng = std::mt19937_64;

std::size_t uniform_int(Rng& rng, std::size_t lo, std::size_t hi) {
  return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

Matrix gaussian(Rng& rng, std::size_t rows, std::size_t cols, double scale = 1.0) {
  std::normal_distribution<double> normal(0.0, scale);
  Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = normal(rng);
  return m;
}

Vector random_simplex(Rng& rng, std::size_t n) {
  std::exponential_distribution<double> e(1.0);
  Vector v(static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = e(rng) + 1e-3;
  return v / v.sum();
}

void record(SuiteResult& s, double violation) {
  ++s.cases;
  s.worst = std::max(s.worst, violation);
  if (!(violation <= s.tolerance)) ++s.failures;
}

// Random class partition with k classes and n rows in total.
ClassPartition random_partition(Rng& rng, std::size_t k, std::size_t max_per_class) {
  std::vector<std::size_t> counts(k);
  for (auto& c : counts) c = uniform_int(rng, 1, max_per_class);
  return ClassPartition::from_counts(counts);
}

DiscreteJointDistribution random_joint(Rng& rng, const Matrix& support, std::size_t labels) {
  std::vector<JointAtom> atoms;
  Vector zmass = random_simplex(rng, static_cast<std::size_t>(support.rows()));
  for (Eigen::Index i = 0; i < support.rows(); ++i) {
    Vector cond = random_simplex(rng, labels);
    for (std::size_t y = 0; y < labels; ++y)
      atoms.push_back({support.row(i).transpose(), static_cast<ClassId>(y), zmass[i] * cond[static_cast<Eigen::Index>(y)]});
  }
  return DiscreteJointDistribution(std::move(atoms));
}

SuiteResult suite_ot_duality(Rng& rng, std::size_t cases) {
  SuiteResult s{"ot_duality", 0, 0, 0.0, 1e-7, "exact OT duality gap and plan feasibility"};
  for (std::size_t c = 0; c < cases; ++c) {
    const std::size_t n = uniform_int(rng, 1, 20), m = uniform_int(rng, 1, 20);
    Matrix cost = gaussian(rng, n, m).cwiseAbs();
    Vector mu = random_simplex(rng, n), nu = random_simplex(rng, m);
    OtResult r = solve_exact_ot({cost, mu, nu});
    PlanDiagnostics d = diagnose_plan(r.plan, cost);
    double v = std::abs(r.duality_gap) / (1.0 + r.plan.objective);
    v = std::max({v, -d.min_entry, d.row_violation, d.col_violation});
    record(s, v);
  }
  return s;
}

SuiteResult suite_class_weights(Rng& rng, std::size_t cases) {
  SuiteResult s{"class_weights_vs_grid", 0, 0, 0.0, 1e-7,
                "LP objective minus grid-search objective (step 0.05), and relative duality gap"};
  for (std::size_t c = 0; c < cases; ++c) {
    const std::size_t k = uniform_int(rng, 1, 3);
    ClassPartition part = random_partition(rng, k, 5);
    const std::size_t m = uniform_int(rng, 1, 10);
    DistanceMatrix D = pairwise_distances(FeatureMatrix(gaussian(rng, part.num_rows(), 2)),
                                          FeatureMatrix(gaussian(rng, m, 2)));
    ClassWeightSolution lp = solve_class_weights(D, part);
    BruteForceResult grid = brute_force_class_weights(D, part, 0.05);
    record(s, std::max(lp.objective - grid.objective, std::abs(lp.duality_gap) / (1.0 + lp.objective)));
  }
  return s;
}

SuiteResult suite_sinkhorn(Rng& rng, std::size_t cases) {
  SuiteResult s{"sinkhorn_vs_lp", 0, 0, 0.0, 0.05,
                "|sinkhorn - LP| / (1 + LP) at epsilon = 0.001 mean(D)"};
  for (std::size_t c = 0; c < cases; ++c) {
    ClassPartition part = random_partition(rng, uniform_int(rng, 1, 3), 10);
    const std::size_t m = uniform_int(rng, 1, 30);
    DistanceMatrix D = pairwise_distances(FeatureMatrix(gaussian(rng, part.num_rows(), 2)),
                                          FeatureMatrix(gaussian(rng, m, 2)));
    const double lp = solve_class_weights(D, part).objective;
    const double sk = sinkhorn_class_weights(D, part, SinkhornConfig::for_distances(D, 0.001)).objective;
    record(s, std::abs(sk - lp) / (1.0 + lp));
  }
  return s;
}

SuiteResult suite_decomposition(Rng& rng, std::size_t cases) {
  SuiteResult s{"joint_w1_decomposition", 0, 0, 0.0, 1e-7,
                "joint W1 minus (marginal W1 + min conditional term), shared feature support"};
  for (std::size_t c = 0; c < cases; ++c) {
    Matrix support = gaussian(rng, uniform_int(rng, 1, 6), 2);
    const std::size_t labels = uniform_int(rng, 2, 3);
    DiscreteJointDistribution p = random_joint(rng, support, labels), q = random_joint(rng, support, labels);
    InequalityCheck chk = check_decomposition(p, q);
    record(s, std::max(0.0, chk.lhs - chk.rhs));
  }
  return s;
}

SuiteResult suite_error_difference(Rng& rng, std::size_t cases) {
  SuiteResult s{"error_difference_bound", 0, 0, 0.0, 1e-9,
                "|eps_p - eps_q| minus max{rho_upper, 1} * joint W1"};
  for (std::size_t c = 0; c < cases; ++c) {
    const std::size_t K = uniform_int(rng, 2, 5), dim = uniform_int(rng, 1, 3);
    const double scale = std::pow(10.0, std::uniform_real_distribution<double>(-1.0, 1.0)(rng));
    std::vector<ClassId> ids(K);
    for (std::size_t i = 0; i < K; ++i) ids[i] = static_cast<ClassId>(i);
    SoftmaxHead head(gaussian(rng, K, dim, scale), ids);
    DiscreteJointDistribution p = random_joint(rng, gaussian(rng, uniform_int(rng, 1, 5), dim), K);
    DiscreteJointDistribution q = random_joint(rng, gaussian(rng, uniform_int(rng, 1, 5), dim), K);
    InequalityCheck chk = check_error_difference_bound(p, q, head);
    record(s, std::max(0.0, chk.lhs - chk.rhs));
  }
  return s;
}

SuiteResult suite_softmax_lipschitz(std::uint64_t seed, std::size_t pairs) {
  SuiteResult s{"softmax_lipschitz", 0, 0, 0.0, 1e-9,
                "max sampled |softmax(v)-softmax(w)|_1 / |v-w|_2 minus sqrt(K-1)/K, K in {2,3,5,10}"};
  std::string detail;
  for (std::size_t K : {2u, 3u, 5u, 10u}) {
    const double ratio = verify_softmax_lipschitz(K, pairs, seed + K);
    const double alpha = softmax_lipschitz_constant(K);
    record(s, ratio - alpha);
    detail += " K=" + std::to_string(K) + ": max ratio " + std::to_string(ratio) + " vs " + std::to_string(alpha) + ";";
  }
  s.detail += detail;
  return s;
}

SuiteResult suite_induced_error(Rng& rng, std::size_t cases, std::size_t draws) {
  SuiteResult s{"induced_error_monte_carlo", 0, 0, 0.0, 3.0,
                "|simulated error - induced_error| in binomial standard deviations"};
  for (std::size_t c = 0; c < cases; ++c) {
    const std::size_t n = uniform_int(rng, 1, 20), K = uniform_int(rng, 2, 5);
    Matrix probs = softmax_rows(gaussian(rng, n, K, 2.0));
    std::vector<int> labels(n);
    for (auto& y : labels) y = static_cast<int>(uniform_int(rng, 0, K - 1));
    const double expected = induced_error(probs, labels);
    std::size_t wrong = 0;
    for (std::size_t d = 0; d < draws; ++d) {
      const std::size_t i = uniform_int(rng, 0, n - 1);
      const auto row = probs.row(static_cast<Eigen::Index>(i));
      std::discrete_distribution<int> pick(row.data(), row.data() + row.size());
      if (pick(rng) != labels[i]) ++wrong;
    }
    const double observed = static_cast<double>(wrong) / static_cast<double>(draws);
    const double sigma = std::sqrt(std::max(expected * (1.0 - expected), 1e-12) / static_cast<double>(draws));
    record(s, std::abs(observed - expected) / sigma);
  }
  return s;
}

SuiteResult suite_sigma_max(Rng& rng, std::size_t cases) {
  SuiteResult s{"sigma_max_vs_svd", 0, 0, 0.0, 1e-9, "relative error of power iteration against Jacobi SVD"};
  for (std::size_t c = 0; c < cases; ++c) {
    Matrix M = gaussian(rng, uniform_int(rng, 1, 20), uniform_int(rng, 1, 20));
    const double oracle = Eigen::JacobiSVD<Matrix>(M).singularValues()(0);
    record(s, std::abs(largest_singular_value(M).value - oracle) / oracle);
  }
  return s;
}

SuiteResult suite_operator_norm(Rng& rng, std::size_t cases) {
  SuiteResult s{"operator_norm_surrogate", 0, 0, 0.0, 1e-9, "|M u|_2 - sigma_max(M) for unit u"};
  for (std::size_t c = 0; c < cases; ++c) {
    Matrix M = gaussian(rng, uniform_int(rng, 1, 8), uniform_int(rng, 1, 8));
    Vector u = gaussian(rng, static_cast<std::size_t>(M.cols()), 1).col(0);
    if (u.norm() == 0.0) continue;
    u.normalize();
    record(s, (M * u).norm() - largest_singular_value(M).value);
  }
  return s;
}

SuiteResult suite_gradient(Rng& rng, std::size_t cases) {
  SuiteResult s{"cross_entropy_gradient", 0, 0, 0.0, 1e-5,
                "relative error of the analytic gradient against central differences (step 1e-5)"};
  for (std::size_t c = 0; c < cases; ++c) {
    const std::size_t K = uniform_int(rng, 2, 5), p = uniform_int(rng, 1, 6), n = uniform_int(rng, 1, 12);
    Matrix V = gaussian(rng, K, p), X = gaussian(rng, n, p);
    std::vector<int> y(n);
    for (auto& v : y) v = static_cast<int>(uniform_int(rng, 0, K - 1));
    Vector w = random_simplex(rng, n);
    std::vector<double> wv(w.data(), w.data() + w.size());
    const double l2 = 0.1;
    const Matrix g = weighted_cross_entropy(V, X, y, wv, l2).grad;
    Matrix fd(V.rows(), V.cols());
    for (Eigen::Index i = 0; i < V.size(); ++i) {
      Matrix a = V, b = V;
      a.data()[i] += 1e-5;
      b.data()[i] -= 1e-5;
      fd.data()[i] = (weighted_cross_entropy(a, X, y, wv, l2).loss - weighted_cross_entropy(b, X, y, wv, l2).loss) / 2e-5;
    }
    record(s, (g - fd).norm() / std::max(1.0, fd.norm()));
  }
  return s;
}

}  // namespace

VerifyReport run_property_suites(std::uint64_t seed, std::size_t trials) {
  trials = std::max<std::size_t>(trials, 1);
  auto scaled = [&](std::size_t per, std::size_t cap) { return std::clamp<std::size_t>(trials / per, 1, cap); };
  VerifyReport report;
  Rng rng(seed);
  report.suites.push_back(suite_ot_duality(rng, scaled(5, 200)));
  report.suites.push_back(suite_class_weights(rng, scaled(50, 20)));
  report.suites.push_back(suite_sinkhorn(rng, scaled(100, 10)));
  report.suites.push_back(suite_decomposition(rng, scaled(5, 200)));
  report.suites.push_back(suite_error_difference(rng, scaled(5, 200)));
  report.suites.push_back(suite_softmax_lipschitz(seed, trials));
  report.suites.push_back(suite_induced_error(rng, 5, std::max<std::size_t>(trials * 100, 10000)));
  report.suites.push_back(suite_sigma_max(rng, scaled(10, 100)));
  report.suites.push_back(suite_operator_norm(rng, scaled(1, 1000)));
  report.suites.push_back(suite_gradient(rng, scaled(20, 50)));
  return report;
}

std::string verify_report_json(const VerifyReport& report) {
  nlohmann::ordered_json j;
  j["all_pass"] = report.all_pass();
  auto suites = nlohmann::ordered_json::array();
  for (const auto& s : report.suites)
    suites.push_back({{"name", s.name},
                      {"pass", s.pass()},
                      {"cases", s.cases},
                      {"failures", s.failures},
                      {"worst", s.worst},
                      {"tolerance", s.tolerance},
                      {"detail", s.detail}});
  j["suites"] = suites;
  return j.dump(2);
}

}  // namespace wass
