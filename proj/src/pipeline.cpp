#include "wass/pipeline.hpp"

#include "wass/error.hpp"
#include "wass/ot.hpp"

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <numeric>
#include <random>

namespace wass {

std::vector<int> predict(const SoftmaxHead& head, const Matrix& features) {
  Matrix logits = head.logits(features);
  std::vector<int> out(static_cast<std::size_t>(logits.rows()));
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    Eigen::Index best = 0;
    for (Eigen::Index c = 1; c < logits.cols(); ++c)
      if (logits(i, c) > logits(i, best)) best = c;
    out[static_cast<std::size_t>(i)] = static_cast<int>(best);
  }
  return out;
}

EvalReport evaluate(const SoftmaxHead& head, const Matrix& features, std::span<const ClassId> labels) {
  if (static_cast<std::size_t>(features.rows()) != labels.size())
    fail(ErrorKind::DimensionMismatch, "features and labels must have the same length");
  if (labels.empty()) fail(ErrorKind::InvalidArgument, "evaluation set is empty");
  std::vector<int> rows(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    rows[i] = head.index_of(labels[i]);
    if (rows[i] < 0) fail(ErrorKind::UnknownLabel, "label " + std::to_string(labels[i]) + " is not a head class");
  }
  Matrix logits = head.logits(features);
  std::vector<int> pred = predict(head, features);
  std::map<ClassId, std::pair<std::size_t, std::size_t>> tally;  // id -> (count, correct)
  std::size_t wrong = 0;
  double ce = 0.0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    const double mx = logits.row(r).maxCoeff();
    ce += mx + std::log((logits.row(r).array() - mx).exp().sum()) - logits(r, rows[i]);
    auto& t = tally[labels[i]];
    ++t.first;
    if (pred[i] == rows[i]) ++t.second;
    else ++wrong;
  }
  EvalReport report;
  report.n_eval = labels.size();
  report.zero_one_error = static_cast<double>(wrong) / static_cast<double>(labels.size());
  report.cross_entropy = ce / static_cast<double>(labels.size());
  for (const auto& [id, t] : tally)
    report.per_class.push_back({id, t.first, static_cast<double>(t.second) / static_cast<double>(t.first)});
  return report;
}

Method parse_method(const std::string& name) {
  if (name == "wass") return Method::Wass;
  if (name == "wass_sinkhorn") return Method::WassSinkhorn;
  if (name == "all") return Method::All;
  if (name == "rnd") return Method::Rnd;
  if (name == "mn") return Method::Mn;
  fail(ErrorKind::InvalidArgument, "unknown method '" + name + "' (expected wass, wass_sinkhorn, all, rnd or mn)");
}

std::string to_string(Method method) {
  switch (method) {
    case Method::Wass: return "wass";
    case Method::WassSinkhorn: return "wass_sinkhorn";
    case Method::All: return "all";
    case Method::Rnd: return "rnd";
    case Method::Mn: return "mn";
  }
  return "unknown";
}

ClassWeights baseline_weights(Method method, const LabeledDataset& source, const FeatureMatrix& target,
                              std::uint64_t seed, std::size_t mn_top) {
  const std::size_t k = source.num_classes();
  switch (method) {
    case Method::All:
      return ClassWeights::uniform(k);
    case Method::Rnd: {
      std::mt19937_64 rng(seed);
      std::bernoulli_distribution coin(0.5);
      std::vector<bool> pick(k);
      std::size_t chosen = 0;
      while (chosen == 0) {
        chosen = 0;
        for (std::size_t i = 0; i < k; ++i) {
          pick[i] = coin(rng);
          chosen += pick[i] ? 1 : 0;
        }
      }
      std::vector<double> w(k, 0.0);
      for (std::size_t i = 0; i < k; ++i)
        if (pick[i]) w[i] = 1.0 / static_cast<double>(chosen);
      return ClassWeights(std::move(w));
    }
    case Method::Mn: {
      if (mn_top == 0) fail(ErrorKind::InvalidArgument, "mn_top must be >= 1");
      if (target.cols() != source.features().cols())
        fail(ErrorKind::DimensionMismatch, "source and target feature dimensions differ");
      const Eigen::RowVectorXd target_mean = target.values().colwise().mean();
      Matrix sums = Matrix::Zero(static_cast<Eigen::Index>(k), source.features().values().cols());
      for (std::size_t r = 0; r < source.size(); ++r)
        sums.row(source.labels()[r]) += source.features().row(r);
      std::vector<double> dist(k);
      for (std::size_t i = 0; i < k; ++i) {
        Eigen::RowVectorXd mean = sums.row(static_cast<Eigen::Index>(i)) / static_cast<double>(source.class_counts()[i]);
        dist[i] = (mean - target_mean).norm();
      }
      std::vector<std::size_t> order(k);
      std::iota(order.begin(), order.end(), 0);
      std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return dist[a] < dist[b]; });
      const std::size_t top = std::min(mn_top, k);
      std::vector<double> w(k, 0.0);
      for (std::size_t i = 0; i < top; ++i) w[order[i]] = 1.0 / static_cast<double>(top);
      return ClassWeights(std::move(w));
    }
    case Method::Wass:
    case Method::WassSinkhorn:
      break;
  }
  fail(ErrorKind::InvalidArgument, "baseline_weights handles all, rnd and mn only");
}

LabeledDataset resample_fixed_budget(const LabeledDataset& dataset, std::span<const double> sample_probs,
                                     std::size_t budget, std::uint64_t seed) {
  if (budget == 0) fail(ErrorKind::InvalidArgument, "budget must be >= 1");
  if (sample_probs.size() != dataset.size())
    fail(ErrorKind::DimensionMismatch, "one probability per sample is required");
  double total = 0.0;
  for (double p : sample_probs) {
    if (!std::isfinite(p) || p < 0.0) fail(ErrorKind::InvalidArgument, "sample probabilities must be finite and >= 0");
    total += p;
  }
  if (total == 0.0) fail(ErrorKind::AllZeroProbabilities, "every sample probability is zero");
  std::mt19937_64 rng(seed);
  std::discrete_distribution<std::size_t> draw(sample_probs.begin(), sample_probs.end());
  std::vector<std::size_t> picks(budget);
  for (auto& p : picks) p = draw(rng);
  return dataset.select_rows(picks);
}

namespace {

class Stopwatch {
 public:
  Stopwatch() : start_(std::chrono::steady_clock::now()) {}
  double lap_ms() {
    auto now = std::chrono::steady_clock::now();
    double ms = std::chrono::duration<double, std::milli>(now - start_).count();
    start_ = now;
    return ms;
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

}  // namespace

PipelineResult run_pipeline(const LabeledDataset& source, const LabeledDataset& target_train,
                            const LabeledDataset& target_test, const PipelineConfig& config) {
  const std::size_t p = source.features().cols();
  if (target_train.features().cols() != p || target_test.features().cols() != p)
    fail(ErrorKind::DimensionMismatch, "source and target feature dimensions differ");
  Stopwatch clock;
  std::vector<std::pair<std::string, double>> timings;
  std::vector<std::string> warnings;

  const DistanceMatrix D = pairwise_distances(source.features(), target_train.features());
  const ClassPartition classes = ClassPartition::from_labels(source.labels(), source.num_classes());
  std::optional<ClassWeights> weights;
  double w1 = 0.0;
  std::string solver = "none";
  if (config.method == Method::Wass || config.method == Method::WassSinkhorn) {
    SelectOptions opts = config.select;
    if (config.method == Method::WassSinkhorn) opts.solver = SolverKind::Sinkhorn;
    ClassWeightSolution sol = select_class_weights(D, classes, opts);
    weights = sol.weights.clamped();
    w1 = sol.objective;
    solver = sol.solver;
    for (auto& w : sol.warnings) warnings.push_back(std::move(w));
  } else {
    weights = baseline_weights(config.method, source, target_train.features(), config.seed, config.mn_top);
    w1 = reweighted_wasserstein(D, classes, *weights);
  }
  timings.emplace_back("weights", clock.lap_ms());

  std::vector<double> probs = weights_to_sample_probabilities(*weights, source.labels());
  std::optional<LabeledDataset> pretrain_set;
  std::vector<double> masses;
  if (config.budget > 0) {
    pretrain_set = resample_fixed_budget(source, probs, config.budget, config.seed ^ 0x5bd1e995ULL);
    masses.assign(config.budget, 1.0 / static_cast<double>(config.budget));
  } else {
    pretrain_set = source;
    masses = probs;
  }
  TrainResult pre = train_encoder_and_head(pretrain_set->features(), pretrain_set->label_set(), masses,
                                           config.encoder_dim, config.pretrain);
  timings.emplace_back("pretrain", clock.lap_ms());

  const FeatureMatrix train_z = pre.encoder.encode(target_train.features());
  const FeatureMatrix test_z = pre.encoder.encode(target_test.features());
  TrainResult fine = finetune_head(train_z, target_train.label_set(), &pre.head, config.finetune);
  timings.emplace_back("finetune", clock.lap_ms());

  std::vector<ClassId> test_labels = target_test.original_labels();
  EvalReport eval = evaluate(fine.head, test_z.values(), test_labels);
  timings.emplace_back("evaluate", clock.lap_ms());

  const std::size_t support = weights->support().size();
  return PipelineResult{*weights,
                        source.class_ids(),
                        w1,
                        support,
                        solver,
                        std::move(pre),
                        std::move(fine),
                        std::move(eval),
                        std::move(*pretrain_set),
                        std::move(masses),
                        std::move(warnings),
                        std::move(timings)};
}

BoundReport pipeline_bound_report(const PipelineResult& result, const LabeledDataset& target_eval) {
  const auto& enc = result.pretrained.encoder;
  LabeledDataset source(enc.encode(result.pretrain_set.features()), result.pretrain_set.label_set());
  LabeledDataset target(enc.encode(target_eval.features()), target_eval.label_set());
  return transfer_bound_report(result.pretrained.head, result.finetuned.head,
                               DiscreteJointDistribution::from_dataset(source, result.pretrain_masses),
                               DiscreteJointDistribution::from_dataset(target));
}

std::string eval_report_json(const EvalReport& report) {
  nlohmann::ordered_json j;
  j["zero_one_error"] = report.zero_one_error;
  j["accuracy"] = 1.0 - report.zero_one_error;
  j["cross_entropy"] = report.cross_entropy;
  j["n_eval"] = report.n_eval;
  auto per = nlohmann::ordered_json::array();
  for (const auto& c : report.per_class)
    per.push_back({{"class_id", c.class_id}, {"count", c.count}, {"accuracy", c.accuracy}});
  j["per_class_accuracy"] = per;
  return j.dump(2);
}

}  // namespace wass
