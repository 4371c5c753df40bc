#pragma once

#include "wass/data_model.hpp"

namespace wass {

/// Euclidean distances between every source row (matrix rows) and every
/// target row (matrix columns).
class DistanceMatrix {
 public:
  explicit DistanceMatrix(Matrix values);

  std::size_t rows() const { return static_cast<std::size_t>(values_.rows()); }
  std::size_t cols() const { return static_cast<std::size_t>(values_.cols()); }
  const Matrix& values() const { return values_; }
  double operator()(std::size_t i, std::size_t j) const {
    return values_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  }
  double mean() const { return values_.mean(); }
  double max() const { return values_.maxCoeff(); }

 private:
  Matrix values_;
};

/// Uses the Gram expansion |a|^2 + |b|^2 - 2 a.b. Entries whose radicand is
/// within cancellation range of zero are recomputed from the difference vector,
/// so identical rows give exactly 0.
DistanceMatrix pairwise_distances(const FeatureMatrix& source, const FeatureMatrix& target);

}  // namespace wass
