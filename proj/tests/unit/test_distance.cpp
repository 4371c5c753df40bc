#include "test_util.hpp"

#include "wass/distance.hpp"

#include <cmath>

using namespace wass;

TEST_CASE("3-4-5 triangle") {
  Matrix a(1, 2), b(1, 2);
  a << 0, 0;
  b << 3, 4;
  CHECK(pairwise_distances(FeatureMatrix(a), FeatureMatrix(b))(0, 0) == 5.0);
}

TEST_CASE("identical rows give exactly zero") {
  std::mt19937_64 rng(3);
  Matrix a = wass::testing::random_matrix(rng, 4, 6, 100.0);
  DistanceMatrix d = pairwise_distances(FeatureMatrix(a), FeatureMatrix(a));
  for (std::size_t i = 0; i < 4; ++i) CHECK(d(i, i) == 0.0);
}

TEST_CASE("matches a naive double loop") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    Matrix a = wass::testing::random_matrix(rng, 5, 3), b = wass::testing::random_matrix(rng, 4, 3);
    DistanceMatrix d = pairwise_distances(FeatureMatrix(a), FeatureMatrix(b));
    REQUIRE(d.rows() == 5);
    REQUIRE(d.cols() == 4);
    for (Eigen::Index i = 0; i < 5; ++i)
      for (Eigen::Index j = 0; j < 4; ++j) {
        double s = 0.0;
        for (Eigen::Index c = 0; c < 3; ++c) s += (a(i, c) - b(j, c)) * (a(i, c) - b(j, c));
        CHECK(std::abs(d(i, j) - std::sqrt(s)) <= 1e-9);
      }
  }
}

TEST_CASE("distance properties") {
  std::mt19937_64 rng(5);
  Matrix a = wass::testing::random_matrix(rng, 8, 4, 10.0);
  DistanceMatrix d = pairwise_distances(FeatureMatrix(a), FeatureMatrix(a));
  for (std::size_t i = 0; i < 8; ++i)
    for (std::size_t j = 0; j < 8; ++j) {
      CHECK(d(i, j) >= 0.0);
      CHECK(std::abs(d(i, j) - d(j, i)) <= 1e-9);
      for (std::size_t k = 0; k < 8; ++k) CHECK(d(i, k) <= d(i, j) + d(j, k) + 1e-9);
    }
}

TEST_CASE("dimension mismatch") {
  CHECK(wass::testing::error_kind_of([] {
          pairwise_distances(FeatureMatrix(Matrix::Zero(2, 2)), FeatureMatrix(Matrix::Zero(2, 3)));
        }) == ErrorKind::DimensionMismatch);
}
