#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace wass {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;
using ClassId = std::int64_t;

inline constexpr double kWeightClampTolerance = 1e-9;
inline constexpr double kSimplexSumTolerance = 1e-8;

/// Dense embedding matrix, one sample per row. Always non-empty and finite.
class FeatureMatrix {
 public:
  explicit FeatureMatrix(Matrix values);

  std::size_t rows() const { return static_cast<std::size_t>(values_.rows()); }
  std::size_t cols() const { return static_cast<std::size_t>(values_.cols()); }
  const Matrix& values() const { return values_; }
  auto row(std::size_t i) const { return values_.row(static_cast<Eigen::Index>(i)); }

  /// Rows picked by index, in the given order (duplicates allowed).
  FeatureMatrix select_rows(std::span<const std::size_t> indices) const;

 private:
  Matrix values_;
};

/// Dense class labels 0..k-1 plus the original id of every dense class.
struct LabelSet {
  std::vector<int> labels;
  std::vector<ClassId> class_ids;

  std::size_t num_classes() const { return class_ids.size(); }
};

/// Re-indexes arbitrary ids densely, in first-appearance order.
LabelSet densify_labels(std::span<const ClassId> raw);

class LabeledDataset {
 public:
  LabeledDataset(FeatureMatrix features, LabelSet labels);

  const FeatureMatrix& features() const { return features_; }
  const std::vector<int>& labels() const { return labels_.labels; }
  const std::vector<ClassId>& class_ids() const { return labels_.class_ids; }
  const LabelSet& label_set() const { return labels_; }

  std::size_t size() const { return features_.rows(); }
  std::size_t num_classes() const { return labels_.class_ids.size(); }
  const std::vector<std::size_t>& class_counts() const { return counts_; }
  ClassId original_label(std::size_t row) const {
    return labels_.class_ids[static_cast<std::size_t>(labels_.labels[row])];
  }
  std::vector<ClassId> original_labels() const;

  /// Subset of rows; classes that vanish are dropped and the rest re-densified.
  LabeledDataset select_rows(std::span<const std::size_t> indices) const;

 private:
  FeatureMatrix features_;
  LabelSet labels_;
  std::vector<std::size_t> counts_;
};

/// Point of the probability simplex over source classes.
class ClassWeights {
 public:
  explicit ClassWeights(std::vector<double> weights);

  static ClassWeights uniform(std::size_t k);

  const std::vector<double>& values() const { return weights_; }
  std::size_t size() const { return weights_.size(); }
  double operator[](std::size_t i) const { return weights_[i]; }

  /// Entries below the clamp tolerance set to zero, then renormalized.
  ClassWeights clamped() const;
  std::vector<std::size_t> support(double threshold = kWeightClampTolerance) const;

 private:
  std::vector<double> weights_;
};

struct TransportPlan {
  Matrix plan;
  Vector source_marginal;
  Vector target_marginal;
  double objective = 0.0;
};

/// Largest violation of the plan's structural invariants against `cost`:
/// negativity, row/column marginal mismatch and relative objective mismatch.
struct PlanDiagnostics {
  double min_entry = 0.0;
  double row_violation = 0.0;
  double col_violation = 0.0;
  double objective_rel_error = 0.0;
};
PlanDiagnostics diagnose_plan(const TransportPlan& plan, const Matrix& cost);

struct JointAtom {
  Vector feature;
  ClassId label = 0;
  double mass = 0.0;
};

/// Finite distribution over feature x label pairs.
class DiscreteJointDistribution {
 public:
  explicit DiscreteJointDistribution(std::vector<JointAtom> atoms);

  /// Uniform mass over the rows of a dataset, labelled with original ids.
  static DiscreteJointDistribution from_dataset(const LabeledDataset& data);
  /// Per-row masses (zero-mass rows are dropped).
  static DiscreteJointDistribution from_dataset(const LabeledDataset& data,
                                                std::span<const double> masses);

  const std::vector<JointAtom>& atoms() const { return atoms_; }
  std::size_t size() const { return atoms_.size(); }
  std::size_t dim() const { return static_cast<std::size_t>(atoms_.front().feature.size()); }

 private:
  std::vector<JointAtom> atoms_;
};

// File formats -------------------------------------------------------------

enum class MatrixFormat { Binary, Csv, Auto };

MatrixFormat parse_matrix_format(const std::string& name);

FeatureMatrix load_feature_matrix(const std::filesystem::path& path,
                                  MatrixFormat format = MatrixFormat::Auto);
void save_feature_matrix(const FeatureMatrix& m, const std::filesystem::path& path,
                         MatrixFormat format = MatrixFormat::Binary);

/// Reads "WSF1" binary or CSV. Unlike load_feature_matrix, entries may be any
/// finite real (used for cost matrices and marginals).
Matrix load_matrix(const std::filesystem::path& path, MatrixFormat format = MatrixFormat::Auto);
void save_matrix(const Matrix& m, const std::filesystem::path& path, MatrixFormat format);

/// A CSV vector may be written as one line or one value per line.
Vector load_vector(const std::filesystem::path& path);

LabelSet load_labels(const std::filesystem::path& path);
void save_labels(std::span<const ClassId> labels, const std::filesystem::path& path);

LabeledDataset load_dataset(const std::filesystem::path& features,
                            const std::filesystem::path& labels,
                            MatrixFormat format = MatrixFormat::Auto);

void save_class_weights(const ClassWeights& w, std::span<const ClassId> class_ids,
                        const std::filesystem::path& path);
std::string class_weights_json(const ClassWeights& w, std::span<const ClassId> class_ids);

// Parsing helpers shared by the loaders, exposed for tests.
FeatureMatrix parse_feature_csv(const std::string& text);
LabelSet parse_labels(const std::string& text);

}  // namespace wass
