#include "wass/distance.hpp"

#include "wass/error.hpp"

#include <cmath>

namespace wass {

DistanceMatrix::DistanceMatrix(Matrix values) : values_(std::move(values)) {
  if (values_.size() == 0) fail(ErrorKind::InvalidArgument, "empty distance matrix");
  if (!values_.allFinite() || values_.minCoeff() < 0.0)
    fail(ErrorKind::InvalidArgument, "distances must be finite and nonnegative");
}

DistanceMatrix pairwise_distances(const FeatureMatrix& source, const FeatureMatrix& target) {
  if (source.cols() != target.cols())
    fail(ErrorKind::DimensionMismatch, "source has " + std::to_string(source.cols()) +
                                           " features, target has " +
                                           std::to_string(target.cols()));
  const Matrix& a = source.values();
  const Matrix& b = target.values();
  Vector a2 = a.rowwise().squaredNorm();
  Vector b2 = b.rowwise().squaredNorm();
  Matrix d = -2.0 * (a * b.transpose());
  d.colwise() += a2;
  d.rowwise() += b2.transpose();

  // Relative size below which the expansion has lost all significant digits.
  constexpr double kCancellation = 1e-8;
  for (Eigen::Index i = 0; i < d.rows(); ++i) {
    for (Eigen::Index j = 0; j < d.cols(); ++j) {
      double r = d(i, j);
      if (r <= kCancellation * (a2[i] + b2[j])) r = (a.row(i) - b.row(j)).squaredNorm();
      d(i, j) = std::sqrt(std::max(r, 0.0));
    }
  }
  return DistanceMatrix(std::move(d));
}

}  // namespace wass
