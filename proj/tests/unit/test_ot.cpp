#include "test_util.hpp"

#include "wass/ot.hpp"

#include <algorithm>
#include <array>
#include <cmath>

using namespace wass;

TEST_CASE("single atoms are forced together") {
  Matrix c(1, 1);
  c << 2.5;
  OtResult r = solve_exact_ot({c, Vector::Ones(1), Vector::Ones(1)});
  CHECK(r.plan.plan(0, 0) == 1.0);
  CHECK(r.plan.objective == 2.5);
}

TEST_CASE("identity transport on a shared support") {
  std::mt19937_64 rng(1);
  Matrix pts = wass::testing::random_matrix(rng, 5, 2);
  Matrix c = pairwise_distances(FeatureMatrix(pts), FeatureMatrix(pts)).values();
  Vector mu(5);
  mu << 0.1, 0.3, 0.2, 0.25, 0.15;
  CHECK(std::abs(wasserstein1(c, mu, mu)) <= 1e-12);
}

TEST_CASE("3x3 uniform equals the best permutation over three") {
  std::mt19937_64 rng(42);
  std::uniform_int_distribution<int> cost(0, 20);
  for (int trial = 0; trial < 50; ++trial) {
    Matrix c(3, 3);
    for (Eigen::Index i = 0; i < 3; ++i)
      for (Eigen::Index j = 0; j < 3; ++j) c(i, j) = cost(rng);
    std::array<int, 3> perm{0, 1, 2};
    double best = 1e300;
    do {
      best = std::min(best, c(0, perm[0]) + c(1, perm[1]) + c(2, perm[2]));
    } while (std::next_permutation(perm.begin(), perm.end()));
    OtResult r = solve_exact_ot({c, uniform_marginal(3), uniform_marginal(3)});
    CHECK(std::abs(r.plan.objective - best / 3.0) <= 1e-12);
  }
}

TEST_CASE("plans are feasible and certified") {
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<int> size(1, 25);
  std::uniform_real_distribution<double> u(0.01, 1.0);
  for (int trial = 0; trial < 60; ++trial) {
    const int n = size(rng), m = size(rng);
    Matrix c = wass::testing::random_matrix(rng, n, m).cwiseAbs();
    Vector mu(n), nu(m);
    for (int i = 0; i < n; ++i) mu(i) = u(rng);
    for (int j = 0; j < m; ++j) nu(j) = u(rng);
    mu /= mu.sum();
    nu /= nu.sum();
    OtResult r = solve_exact_ot({c, mu, nu});
    PlanDiagnostics d = diagnose_plan(r.plan, c);
    CHECK(d.min_entry >= -1e-12);
    CHECK(d.row_violation <= 1e-9);
    CHECK(d.col_violation <= 1e-9);
    CHECK(std::abs(r.duality_gap) <= 1e-9 * (1.0 + r.plan.objective));
    // Dual feasibility of the certificate.
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < m; ++j) CHECK(r.u(i) + r.v(j) <= c(i, j) + 1e-9);
  }
}

TEST_CASE("ot validation") {
  using wass::testing::error_kind_of;
  Matrix c = Matrix::Ones(2, 2);
  Vector bad(2);
  bad << 0.7, 0.7;
  CHECK(error_kind_of([&] { solve_exact_ot({c, bad, uniform_marginal(2)}); }) == ErrorKind::InfeasibleMarginals);
  CHECK(error_kind_of([&] { solve_exact_ot({c, uniform_marginal(3), uniform_marginal(2)}); }) ==
        ErrorKind::DimensionMismatch);
}

namespace {

DiscreteJointDistribution joint(std::vector<std::pair<double, ClassId>> atoms, std::vector<double> masses) {
  std::vector<JointAtom> out;
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    Vector z(1);
    z << atoms[i].first;
    out.push_back({z, atoms[i].second, masses[i]});
  }
  return DiscreteJointDistribution(std::move(out));
}

}  // namespace

TEST_CASE("joint wasserstein examples") {
  auto p = joint({{0.0, 0}, {1.0, 1}}, {0.5, 0.5});
  CHECK(std::abs(joint_wasserstein(p, p)) <= 1e-12);
  auto q = joint({{0.0, 1}, {1.0, 0}}, {0.5, 0.5});
  // Swapping labels in place costs 1 per unit, crossing over costs 1 as well.
  CHECK(std::abs(joint_wasserstein(p, q, 1.0) - 1.0) <= 1e-12);
}

TEST_CASE("joint wasserstein is invariant to atom order") {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> x(-2, 2), m(0.05, 1);
  std::uniform_int_distribution<int> y(0, 1);
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<std::pair<double, ClassId>> a(4), b(4);
    std::vector<double> ma(4), mb(4);
    for (int i = 0; i < 4; ++i) {
      a[i] = {x(rng), y(rng)};
      b[i] = {x(rng), y(rng)};
      ma[i] = m(rng);
      mb[i] = m(rng);
    }
    double sa = 0, sb = 0;
    for (int i = 0; i < 4; ++i) sa += ma[i], sb += mb[i];
    for (int i = 0; i < 4; ++i) ma[i] /= sa, mb[i] /= sb;
    const double w = joint_wasserstein(joint(a, ma), joint(b, mb));
    // Oracle: dense cost assembled by hand on a permuted atom order.
    std::array<int, 4> pa{3, 1, 0, 2}, pb{2, 0, 3, 1};
    Matrix c(4, 4);
    Vector mu(4), nu(4);
    for (int i = 0; i < 4; ++i) {
      mu(i) = ma[pa[i]];
      nu(i) = mb[pb[i]];
      for (int j = 0; j < 4; ++j)
        c(i, j) = std::abs(a[pa[i]].first - b[pb[j]].first) + (a[pa[i]].second != b[pb[j]].second ? 1.0 : 0.0);
    }
    CHECK(std::abs(w - wasserstein1(c, mu, nu)) <= 1e-12);
  }
}

TEST_CASE("conditional term examples") {
  auto p = joint({{0.0, 0}, {1.0, 1}}, {0.5, 0.5});
  CHECK(conditional_wasserstein_term(p, p, ConditionalWeighting::Source) == 0.0);
  auto a = joint({{0.0, 0}}, {1.0});
  auto b = joint({{0.0, 1}}, {1.0});
  CHECK(conditional_wasserstein_term(a, b, ConditionalWeighting::Source) == doctest::Approx(1.0));

  // z=0: (0.5, 0.5) vs (1, 0) moves 0.5; z=1: (1, 0) vs (0.25, 0.75) moves 0.75.
  auto s = joint({{0.0, 0}, {0.0, 1}, {1.0, 0}}, {0.2, 0.2, 0.6});
  auto t = joint({{0.0, 0}, {1.0, 0}, {1.0, 1}}, {0.5, 0.125, 0.375});
  CHECK(conditional_wasserstein_term(s, t, ConditionalWeighting::Source) == doctest::Approx(0.4 * 0.5 + 0.6 * 0.75));
  CHECK(conditional_wasserstein_term(s, t, ConditionalWeighting::Target) == doctest::Approx(0.5 * 0.5 + 0.5 * 0.75));

  auto far = joint({{5.0, 0}}, {1.0});
  CHECK(wass::testing::error_kind_of([&] { conditional_wasserstein_term(a, far, ConditionalWeighting::Source); }) ==
        ErrorKind::SupportMismatch);
}

TEST_CASE("marginal wasserstein ignores labels") {
  auto p = joint({{0.0, 0}, {2.0, 1}}, {0.5, 0.5});
  auto q = joint({{1.0, 5}}, {1.0});
  CHECK(marginal_wasserstein(p, q) == doctest::Approx(1.0));
}
