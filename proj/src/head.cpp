#include "wass/head.hpp"

#include "wass/error.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>

namespace wass {

namespace {

void require_finite(const Matrix& m, const char* what) {
  if (!m.allFinite()) fail(ErrorKind::NonFiniteValue, std::string(what) + " has non-finite entries");
}

nlohmann::json matrix_to_json(const Matrix& m) {
  auto rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    auto row = nlohmann::json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Matrix matrix_from_json(const nlohmann::json& j) {
  if (!j.is_array()) fail(ErrorKind::MalformedFile, "matrix must be an array of rows");
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols = rows > 0 ? static_cast<Eigen::Index>(j[0].size()) : 0;
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const auto& row = j[static_cast<std::size_t>(i)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols)
      fail(ErrorKind::MalformedFile, "matrix rows must all have the same length");
    for (Eigen::Index c = 0; c < cols; ++c) {
      if (!row[static_cast<std::size_t>(c)].is_number())
        fail(ErrorKind::MalformedFile, "matrix entries must be numbers");
      m(i, c) = row[static_cast<std::size_t>(c)].get<double>();
    }
  }
  return m;
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::IoError, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const std::string& text, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::IoError, "cannot write " + path.string());
  out << text;
}

}  // namespace

Matrix softmax_rows(const Matrix& logits) {
  Matrix p(logits.rows(), logits.cols());
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    double mx = logits.row(i).maxCoeff();
    p.row(i) = (logits.row(i).array() - mx).exp().matrix();
    p.row(i) /= p.row(i).sum();
  }
  return p;
}

SoftmaxHead::SoftmaxHead(Matrix weights, std::vector<ClassId> classes)
    : weights_(std::move(weights)), classes_(std::move(classes)) {
  if (classes_.empty()) fail(ErrorKind::InvalidArgument, "a head needs at least one class");
  if (static_cast<std::size_t>(weights_.rows()) != classes_.size())
    fail(ErrorKind::DimensionMismatch, "head has " + std::to_string(weights_.rows()) +
                                           " rows but " + std::to_string(classes_.size()) + " classes");
  require_finite(weights_, "head weight matrix");
  std::vector<ClassId> sorted = classes_;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
    fail(ErrorKind::InvalidArgument, "head class ids must be distinct");
}

SoftmaxHead SoftmaxHead::zeros(std::size_t dim, std::vector<ClassId> classes) {
  Matrix w = Matrix::Zero(static_cast<Eigen::Index>(classes.size()), static_cast<Eigen::Index>(dim));
  return SoftmaxHead(std::move(w), std::move(classes));
}

int SoftmaxHead::index_of(ClassId id) const {
  auto it = std::find(classes_.begin(), classes_.end(), id);
  return it == classes_.end() ? -1 : static_cast<int>(it - classes_.begin());
}

Matrix SoftmaxHead::logits(const Matrix& features) const {
  if (features.cols() != weights_.cols())
    fail(ErrorKind::DimensionMismatch, "features have " + std::to_string(features.cols()) +
                                           " columns, head expects " + std::to_string(weights_.cols()));
  return features * weights_.transpose();
}

Matrix SoftmaxHead::predict_proba(const Matrix& features) const { return softmax_rows(logits(features)); }

std::string head_to_json(const SoftmaxHead& head) {
  nlohmann::ordered_json j;
  j["classes"] = head.classes();
  j["matrix"] = matrix_to_json(head.weights());
  return j.dump(2);
}

SoftmaxHead head_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::MalformedFile, std::string("head JSON: ") + e.what());
  }
  if (!j.contains("classes") || !j.contains("matrix"))
    fail(ErrorKind::MalformedFile, "head JSON needs 'classes' and 'matrix'");
  std::vector<ClassId> classes;
  for (const auto& c : j["classes"]) {
    if (!c.is_number_integer()) fail(ErrorKind::MalformedFile, "class ids must be integers");
    classes.push_back(c.get<ClassId>());
  }
  Matrix w = matrix_from_json(j["matrix"]);
  if (w.rows() == 0) fail(ErrorKind::MalformedFile, "head matrix is empty");
  return SoftmaxHead(std::move(w), std::move(classes));
}

void save_head(const SoftmaxHead& head, const std::filesystem::path& path) {
  write_text(head_to_json(head) + "\n", path);
}

SoftmaxHead load_head(const std::filesystem::path& path) { return head_from_json(read_text(path)); }

FeatureMatrix LinearEncoder::encode(const FeatureMatrix& features) const {
  if (identity()) return features;
  return FeatureMatrix(encode(features.values()));
}

Matrix LinearEncoder::encode(const Matrix& features) const {
  if (identity()) return features;
  if (features.cols() != projection.cols())
    fail(ErrorKind::DimensionMismatch, "encoder expects " + std::to_string(projection.cols()) + " input columns");
  return features * projection.transpose();
}

std::string encoder_to_json(const LinearEncoder& encoder) {
  nlohmann::ordered_json j;
  j["matrix"] = matrix_to_json(encoder.projection);
  return j.dump(2);
}

LinearEncoder encoder_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::MalformedFile, std::string("encoder JSON: ") + e.what());
  }
  if (!j.contains("matrix")) fail(ErrorKind::MalformedFile, "encoder JSON needs 'matrix'");
  return {matrix_from_json(j["matrix"])};
}

LossGrad weighted_cross_entropy(const Matrix& V, const Matrix& features, std::span<const int> labels,
                                std::span<const double> weights, double l2_penalty) {
  const Eigen::Index n = features.rows();
  if (static_cast<std::size_t>(n) != labels.size() || labels.size() != weights.size())
    fail(ErrorKind::DimensionMismatch, "features, labels and weights must have the same length");
  if (features.cols() != V.cols()) fail(ErrorKind::DimensionMismatch, "feature dimension does not match the head");
  Matrix logits = features * V.transpose();
  Matrix G(n, V.rows());
  double loss = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const int y = labels[static_cast<std::size_t>(i)];
    if (y < 0 || y >= V.rows()) fail(ErrorKind::UnknownLabel, "label outside the head's classes");
    const double w = weights[static_cast<std::size_t>(i)];
    const double mx = logits.row(i).maxCoeff();
    Eigen::RowVectorXd e = (logits.row(i).array() - mx).exp().matrix();
    const double z = e.sum();
    loss += w * (mx + std::log(z) - logits(i, y));
    G.row(i) = (w / z) * e;
    G(i, y) -= w;
  }
  LossGrad out;
  out.grad = G.transpose() * features;
  if (l2_penalty > 0.0) {
    loss += 0.5 * l2_penalty * V.squaredNorm();
    out.grad += l2_penalty * V;
  }
  out.loss = loss;
  return out;
}

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate))
    fail(ErrorKind::InvalidArgument, "learning_rate must be > 0");
  if (epochs < 1) fail(ErrorKind::InvalidArgument, "epochs must be >= 1");
  if (!(l2_penalty >= 0.0)) fail(ErrorKind::InvalidArgument, "l2_penalty must be >= 0");
  if (!(validation_fraction >= 0.0) || validation_fraction >= 1.0)
    fail(ErrorKind::InvalidArgument, "validation_fraction must lie in [0, 1)");
}

namespace {

struct Params {
  Matrix V;
  Matrix U;  // empty: head on raw features
};

struct Eval {
  double loss = 0.0;
  Matrix gV, gU;
};

// Weighted objective on a subset of rows, each weight multiplied by `scale`.
Eval evaluate_objective(const Params& p, const Matrix& X, std::span<const int> labels,
                        std::span<const double> probs, const std::vector<std::size_t>& rows,
                        double scale, double l2, bool want_grad) {
  std::vector<Eigen::Index> idx(rows.begin(), rows.end());
  Matrix Xb = X(idx, Eigen::all);
  std::vector<int> yb(rows.size());
  std::vector<double> wb(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    yb[i] = labels[rows[i]];
    wb[i] = probs[rows[i]] * scale;
  }
  Eval out;
  if (p.U.size() == 0) {
    LossGrad lg = weighted_cross_entropy(p.V, Xb, yb, wb, l2);
    out.loss = lg.loss;
    if (want_grad) out.gV = std::move(lg.grad);
    return out;
  }
  Matrix H = Xb * p.U.transpose();
  LossGrad lg = weighted_cross_entropy(p.V, H, yb, wb, 0.0);
  out.loss = lg.loss + 0.5 * l2 * (p.V.squaredNorm() + p.U.squaredNorm());
  if (want_grad) {
    // dL/dlogits, needed for the encoder gradient.
    Matrix P = softmax_rows(H * p.V.transpose());
    for (Eigen::Index i = 0; i < P.rows(); ++i) {
      P(i, yb[static_cast<std::size_t>(i)]) -= 1.0;
      P.row(i) *= wb[static_cast<std::size_t>(i)];
    }
    out.gV = lg.grad + l2 * p.V;
    out.gU = (P * p.V).transpose() * Xb + l2 * p.U;
  }
  return out;
}

void check_inputs(const FeatureMatrix& features, const LabelSet& labels, std::span<const double> probs) {
  if (labels.labels.size() != features.rows() || probs.size() != features.rows())
    fail(ErrorKind::DimensionMismatch, "features, labels and sample probabilities must align");
  double total = 0.0;
  for (double p : probs) {
    if (!std::isfinite(p) || p < 0.0) fail(ErrorKind::InvalidArgument, "sample probabilities must be finite and >= 0");
    total += p;
  }
  if (total == 0.0) fail(ErrorKind::DegenerateInput, "all sample probabilities are zero");
  if (std::abs(total - 1.0) > 1e-6)
    fail(ErrorKind::InvalidArgument, "sample probabilities sum to " + std::to_string(total) + ", expected 1");
  for (int y : labels.labels)
    if (y < 0 || static_cast<std::size_t>(y) >= labels.num_classes())
      fail(ErrorKind::UnknownLabel, "label outside the label set");
}

TrainResult run_training(const FeatureMatrix& features, const LabelSet& labels,
                         std::span<const double> sample_probs, Params params, const TrainConfig& cfg) {
  cfg.validate();
  check_inputs(features, labels, sample_probs);
  const Matrix& X = features.values();
  const std::size_t n = features.rows();
  std::mt19937_64 rng(cfg.seed);

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::vector<std::size_t> train_rows = order, val_rows;
  if (cfg.validation_fraction > 0.0 && n >= 2) {
    std::shuffle(order.begin(), order.end(), rng);
    auto n_val = static_cast<std::size_t>(std::floor(cfg.validation_fraction * static_cast<double>(n)));
    n_val = std::clamp<std::size_t>(n_val, 1, n - 1);
    val_rows.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_val));
    train_rows.assign(order.begin() + static_cast<std::ptrdiff_t>(n_val), order.end());
    std::sort(val_rows.begin(), val_rows.end());
    std::sort(train_rows.begin(), train_rows.end());
  }
  auto mass = [&](const std::vector<std::size_t>& rows) {
    double s = 0.0;
    for (std::size_t r : rows) s += sample_probs[r];
    return s;
  };
  const double train_mass = mass(train_rows);
  if (train_mass == 0.0) fail(ErrorKind::DegenerateInput, "training split carries no probability mass");
  const double val_mass = val_rows.empty() ? 0.0 : mass(val_rows);
  const bool use_val = val_mass > 0.0;

  const std::size_t batch = cfg.batch_size == 0 ? train_rows.size() : std::min(cfg.batch_size, train_rows.size());
  std::vector<std::size_t> perm = train_rows;
  TrainResult result{SoftmaxHead(params.V, labels.class_ids), LinearEncoder{params.U}, {}, 0, false};
  double best = std::numeric_limits<double>::infinity();
  Params best_params = params;
  std::size_t stale = 0;

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    if (batch < train_rows.size()) std::shuffle(perm.begin(), perm.end(), rng);
    for (std::size_t start = 0; start < perm.size(); start += batch) {
      std::vector<std::size_t> rows(perm.begin() + static_cast<std::ptrdiff_t>(start),
                                    perm.begin() + static_cast<std::ptrdiff_t>(std::min(start + batch, perm.size())));
      const double scale = static_cast<double>(train_rows.size()) / (static_cast<double>(rows.size()) * train_mass);
      Eval e = evaluate_objective(params, X, labels.labels, sample_probs, rows, scale, cfg.l2_penalty, true);
      params.V -= cfg.learning_rate * e.gV;
      if (params.U.size() > 0) params.U -= cfg.learning_rate * e.gU;
    }
    if (!params.V.allFinite() || (params.U.size() > 0 && !params.U.allFinite()))
      fail(ErrorKind::SolverFailure, "training diverged; lower the learning rate");
    double train_loss = evaluate_objective(params, X, labels.labels, sample_probs, train_rows,
                                           1.0 / train_mass, cfg.l2_penalty, false).loss;
    result.loss_history.push_back(train_loss);
    result.epochs_run = epoch + 1;
    double monitored = use_val ? evaluate_objective(params, X, labels.labels, sample_probs, val_rows,
                                                    1.0 / val_mass, cfg.l2_penalty, false).loss
                               : train_loss;
    if (monitored < best - 1e-12 * std::max(1.0, std::abs(best))) {
      best = monitored;
      best_params = params;
      stale = 0;
    } else if (++stale >= cfg.early_stop_patience && cfg.early_stop_patience > 0) {
      result.early_stopped = true;
      break;
    }
  }
  // Without a validation split the last iterate is kept; with one, the best.
  const Params& chosen = use_val ? best_params : params;
  result.head = SoftmaxHead(chosen.V, labels.class_ids);
  result.encoder = LinearEncoder{chosen.U};
  return result;
}

}  // namespace

TrainResult train_head(const FeatureMatrix& features, const LabelSet& labels,
                       std::span<const double> sample_probs, const TrainConfig& config) {
  Params p{Matrix::Zero(static_cast<Eigen::Index>(labels.num_classes()), static_cast<Eigen::Index>(features.cols())),
           Matrix()};
  return run_training(features, labels, sample_probs, std::move(p), config);
}

TrainResult train_encoder_and_head(const FeatureMatrix& features, const LabelSet& labels,
                                   std::span<const double> sample_probs, std::size_t encoder_dim,
                                   const TrainConfig& config) {
  if (encoder_dim == 0) return train_head(features, labels, sample_probs, config);
  const auto p = static_cast<Eigen::Index>(features.cols());
  const auto r = static_cast<Eigen::Index>(encoder_dim);
  std::mt19937_64 rng(config.seed ^ 0x9e3779b97f4a7c15ULL);
  std::normal_distribution<double> normal(0.0, 1.0 / std::sqrt(static_cast<double>(p)));
  Matrix U(r, p);
  for (Eigen::Index i = 0; i < U.size(); ++i) U.data()[i] = normal(rng);
  Params params{Matrix::Zero(static_cast<Eigen::Index>(labels.num_classes()), r), std::move(U)};
  return run_training(features, labels, sample_probs, std::move(params), config);
}

TrainResult finetune_head(const FeatureMatrix& features, const LabelSet& labels, const SoftmaxHead* base,
                          const TrainConfig& config) {
  Matrix V = Matrix::Zero(static_cast<Eigen::Index>(labels.num_classes()), static_cast<Eigen::Index>(features.cols()));
  if (base != nullptr) {
    if (base->dim() != features.cols())
      fail(ErrorKind::DimensionMismatch, "base head dimension does not match the features");
    for (std::size_t i = 0; i < labels.num_classes(); ++i) {
      int row = base->index_of(labels.class_ids[i]);
      if (row >= 0) V.row(static_cast<Eigen::Index>(i)) = base->weights().row(row);
    }
  }
  std::vector<double> probs(features.rows(), 1.0 / static_cast<double>(features.rows()));
  return run_training(features, labels, probs, Params{std::move(V), Matrix()}, config);
}

}  // namespace wass
