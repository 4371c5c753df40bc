#pragma once

#include "wass/data_model.hpp"

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace wass {

/// Row-wise softmax, stabilized by subtracting each row's maximum.
Matrix softmax_rows(const Matrix& logits);

/// Linear softmax classifier: probabilities softmax(V x) over `classes`.
class SoftmaxHead {
 public:
  SoftmaxHead(Matrix weights, std::vector<ClassId> classes);

  /// All-zero head (uniform predictions).
  static SoftmaxHead zeros(std::size_t dim, std::vector<ClassId> classes);

  const Matrix& weights() const { return weights_; }
  Matrix& mutable_weights() { return weights_; }
  const std::vector<ClassId>& classes() const { return classes_; }
  std::size_t num_classes() const { return classes_.size(); }
  std::size_t dim() const { return static_cast<std::size_t>(weights_.cols()); }

  /// Row of `id` in the weight matrix, or -1.
  int index_of(ClassId id) const;

  Matrix logits(const Matrix& features) const;
  Matrix predict_proba(const Matrix& features) const;

 private:
  Matrix weights_;
  std::vector<ClassId> classes_;
};

std::string head_to_json(const SoftmaxHead& head);
SoftmaxHead head_from_json(const std::string& text);
void save_head(const SoftmaxHead& head, const std::filesystem::path& path);
SoftmaxHead load_head(const std::filesystem::path& path);

/// Learned linear map z -> U z applied before the head; frozen after pre-training.
struct LinearEncoder {
  Matrix projection;  // r x p

  bool identity() const { return projection.size() == 0; }
  FeatureMatrix encode(const FeatureMatrix& features) const;
  Matrix encode(const Matrix& features) const;
};

std::string encoder_to_json(const LinearEncoder& encoder);
LinearEncoder encoder_from_json(const std::string& text);

struct LossGrad {
  double loss = 0.0;
  Matrix grad;
};

/// sum_j weights_j * CE(labels_j, softmax(V x_j)) + (l2 / 2) |V|_F^2 and its
/// gradient with respect to V. Labels index rows of V.
LossGrad weighted_cross_entropy(const Matrix& V, const Matrix& features,
                                std::span<const int> labels, std::span<const double> weights,
                                double l2_penalty);

struct TrainConfig {
  double learning_rate = 0.5;
  std::size_t epochs = 200;
  std::size_t batch_size = 0;  // 0: full batch
  std::uint64_t seed = 0;
  double l2_penalty = 0.0;
  /// Stop after this many epochs without improvement of the monitored loss
  /// (validation loss when validation_fraction > 0, training loss otherwise).
  std::size_t early_stop_patience = 5;
  double validation_fraction = 0.0;

  void validate() const;
};

struct TrainResult {
  SoftmaxHead head;
  LinearEncoder encoder;            // identity unless trained jointly
  std::vector<double> loss_history;  // full weighted training objective per epoch
  std::size_t epochs_run = 0;
  bool early_stopped = false;
};

/// Minimizes the sample_probs-weighted cross-entropy by mini-batch gradient
/// descent from a zero head. Mini-batch losses are rescaled by N / |B| so each
/// step is an unbiased estimate of the full objective's gradient.
TrainResult train_head(const FeatureMatrix& features, const LabelSet& labels,
                       std::span<const double> sample_probs, const TrainConfig& config);

/// Same objective, but the head acts on U z with U (encoder_dim x p) trained
/// jointly. U starts from a seeded Gaussian draw, the head from zero.
TrainResult train_encoder_and_head(const FeatureMatrix& features, const LabelSet& labels,
                                   std::span<const double> sample_probs, std::size_t encoder_dim,
                                   const TrainConfig& config);

/// Fresh head for the target classes on frozen features, uniform sample
/// weights. Rows for class ids shared with `base` start from base, others at zero.
TrainResult finetune_head(const FeatureMatrix& features, const LabelSet& labels,
                          const SoftmaxHead* base, const TrainConfig& config);

}  // namespace wass
