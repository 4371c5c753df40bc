#include "test_util.hpp"

#include "wass/class_weights.hpp"
#include "wass/ot.hpp"
#include "wass/select.hpp"

#include <cmath>

using namespace wass;
using wass::testing::error_kind_of;

namespace {

DistanceMatrix line_distances(const std::vector<double>& src, const std::vector<double>& tgt) {
  Matrix a(static_cast<Eigen::Index>(src.size()), 1), b(static_cast<Eigen::Index>(tgt.size()), 1);
  for (std::size_t i = 0; i < src.size(); ++i) a(static_cast<Eigen::Index>(i), 0) = src[i];
  for (std::size_t j = 0; j < tgt.size(); ++j) b(static_cast<Eigen::Index>(j), 0) = tgt[j];
  return pairwise_distances(FeatureMatrix(a), FeatureMatrix(b));
}

ClassPartition counts(std::vector<std::size_t> c) { return ClassPartition::from_counts(c); }

}  // namespace

TEST_CASE("one class reduces to fixed-marginal OT") {
  std::mt19937_64 rng(2);
  Matrix a = wass::testing::random_matrix(rng, 7, 2), b = wass::testing::random_matrix(rng, 5, 2);
  DistanceMatrix d = pairwise_distances(FeatureMatrix(a), FeatureMatrix(b));
  ClassWeightSolution s = solve_class_weights(d, counts({7}));
  REQUIRE(s.weights.size() == 1);
  CHECK(s.weights[0] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::abs(s.objective - wasserstein1(d.values(), uniform_marginal(7), uniform_marginal(5))) <= 1e-12);
}

TEST_CASE("mixture reproduces the target exactly") {
  ClassWeightSolution s = solve_class_weights(line_distances({0.0, 10.0}, {0.0, 10.0}), counts({1, 1}));
  CHECK(s.weights[0] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(s.weights[1] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(std::abs(s.objective) <= 1e-12);
}

TEST_CASE("nearest pure class wins") {
  // cost(w) = w_A * 1 + w_B * 3 by hand, minimized at w = (1, 0).
  DistanceMatrix d = line_distances({0.0, 4.0}, {1.0});
  ClassWeightSolution s = solve_class_weights(d, counts({1, 1}));
  CHECK(s.weights[0] == doctest::Approx(1.0));
  CHECK(s.objective == doctest::Approx(1.0));
  BruteForceResult g = brute_force_class_weights(d, counts({1, 1}), 0.01);
  CHECK(g.weights[0] == doctest::Approx(1.0));
  CHECK(g.objective == doctest::Approx(1.0));
  CHECK(g.evaluated == 101);
}

TEST_CASE("grid step one evaluates the pure classes only") {
  DistanceMatrix d = line_distances({0.0, 4.0}, {3.5});
  BruteForceResult g = brute_force_class_weights(d, counts({1, 1}), 1.0);
  CHECK(g.evaluated == 2);
  CHECK(g.weights[1] == 1.0);
  CHECK(g.objective == doctest::Approx(0.5));
}

TEST_CASE("grid search guards") {
  DistanceMatrix d = line_distances({0, 1, 2, 3, 4}, {0});
  CHECK(error_kind_of([&] { brute_force_class_weights(d, counts({1, 1, 1, 1, 1}), 0.5); }) ==
        ErrorKind::TooManyClasses);
  CHECK(error_kind_of([&] { brute_force_class_weights(d, counts({2, 3}), 0.0); }) == ErrorKind::InvalidArgument);
}

TEST_CASE("lp never loses to the grid and certifies itself") {
  std::mt19937_64 rng(123);
  std::uniform_int_distribution<int> kdist(1, 3), cdist(1, 6), mdist(1, 12);
  for (int trial = 0; trial < 25; ++trial) {
    std::vector<std::size_t> c(static_cast<std::size_t>(kdist(rng)));
    std::size_t n = 0;
    for (auto& x : c) n += (x = static_cast<std::size_t>(cdist(rng)));
    Matrix a = wass::testing::random_matrix(rng, static_cast<Eigen::Index>(n), 2);
    Matrix b = wass::testing::random_matrix(rng, mdist(rng), 2);
    b.col(0).array() += 1.0;
    DistanceMatrix d = pairwise_distances(FeatureMatrix(a), FeatureMatrix(b));
    ClassPartition part = counts(c);
    ClassWeightSolution s = solve_class_weights(d, part);
    BruteForceResult g = brute_force_class_weights(d, part, 0.05);
    CHECK(s.objective <= g.objective + 1e-9);
    CHECK(std::abs(s.duality_gap) <= 1e-9 * (1.0 + s.objective));
    // The returned weights evaluated by plain OT reproduce the objective.
    CHECK(std::abs(reweighted_wasserstein(d, part, s.weights.clamped()) - s.objective) <= 1e-9);
    PlanDiagnostics diag = diagnose_plan(s.plan, d.values());
    CHECK(diag.min_entry >= -1e-12);
    CHECK(diag.col_violation <= 1e-9);
    CHECK(diag.row_violation <= 1e-9);
    // Rows of one class carry equal mass.
    std::size_t r = 0;
    for (std::size_t i = 0; i < c.size(); ++i)
      for (std::size_t t = 0; t < c[i]; ++t, ++r)
        CHECK(std::abs(s.plan.plan.row(static_cast<Eigen::Index>(r)).sum() - s.weights[i] / static_cast<double>(c[i])) <=
              1e-9);
    ClassWeightSolution e = solve_class_weights(d, part, {.explicit_simplex_row = true});
    CHECK(std::abs(e.objective - s.objective) <= 1e-9);
  }
}

TEST_CASE("weights to sample probabilities") {
  auto p = weights_to_sample_probabilities(ClassWeights({1.0, 0.0}), std::vector<int>{0, 0, 1, 1});
  CHECK(p == std::vector<double>{0.5, 0.5, 0.0, 0.0});
  p = weights_to_sample_probabilities(ClassWeights({0.5, 0.5}), std::vector<int>{0, 1});
  CHECK(p == std::vector<double>{0.5, 0.5});
  p = weights_to_sample_probabilities(ClassWeights({0.25, 0.75}), std::vector<int>{0, 1, 1, 1});
  for (double x : p) CHECK(x == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(error_kind_of([] { weights_to_sample_probabilities(ClassWeights({1.0}), std::vector<int>{0, 1}); }) ==
        ErrorKind::DimensionMismatch);
}

TEST_CASE("class partition") {
  ClassPartition p = ClassPartition::from_labels(std::vector<int>{1, 0, 1}, 2);
  CHECK(p.counts == std::vector<std::size_t>{1, 2});
  CHECK(p.row_class == std::vector<int>{1, 0, 1});
  CHECK(error_kind_of([] { ClassPartition::from_labels(std::vector<int>{0, 0}, 2); }) == ErrorKind::InvalidArgument);
}

TEST_CASE("solver selection") {
  CHECK(parse_solver_kind("sinkhorn") == SolverKind::Sinkhorn);
  CHECK(error_kind_of([] { parse_solver_kind("magic"); }) == ErrorKind::InvalidArgument);
  DistanceMatrix d = line_distances({0.0, 0.1, 5.0}, {0.0, 0.1});
  ClassWeightSolution exact = select_class_weights(d, counts({2, 1}));
  CHECK(exact.solver == "exact");
  SelectOptions o;
  o.solver = SolverKind::Sinkhorn;
  ClassWeightSolution sk = select_class_weights(d, counts({2, 1}), o);
  CHECK(sk.solver == "sinkhorn");
  CHECK(sk.weights[0] >= 0.99);
  o.solver = SolverKind::Auto;
  o.sinkhorn_threshold = 1.0;
  CHECK(select_class_weights(d, counts({2, 1}), o).solver == "sinkhorn");
}
