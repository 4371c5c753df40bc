#include "test_util.hpp"

#include "wass/pipeline.hpp"
#include "wass/synth.hpp"

#include <cmath>
#include <map>

using namespace wass;
using wass::testing::error_kind_of;

TEST_CASE("evaluate on constant heads") {
  SoftmaxHead h(Matrix::Zero(2, 3), {0, 1});  // ties go to row 0
  Matrix x = Matrix::Ones(4, 3);
  CHECK(evaluate(h, x, std::vector<ClassId>(4, 0)).zero_one_error == 0.0);
  CHECK(evaluate(h, x, std::vector<ClassId>(4, 1)).zero_one_error == 1.0);
  CHECK(evaluate(h, x, std::vector<ClassId>(4, 0)).cross_entropy == doctest::Approx(std::log(2.0)));
  CHECK(error_kind_of([&] { evaluate(h, x, std::vector<ClassId>(4, 5)); }) == ErrorKind::UnknownLabel);
}

TEST_CASE("evaluate matches a per-sample loop") {
  std::mt19937_64 rng(41);
  for (int t = 0; t < 10; ++t) {
    SoftmaxHead h(wass::testing::random_matrix(rng, 4, 3), {3, 1, 4, 2});
    Matrix x = wass::testing::random_matrix(rng, 50, 3);
    std::vector<ClassId> y(50);
    for (auto& v : y) v = std::vector<ClassId>{3, 1, 4, 2}[std::uniform_int_distribution<int>(0, 3)(rng)];
    std::size_t wrong = 0;
    std::map<ClassId, std::pair<int, int>> tally;
    for (Eigen::Index i = 0; i < 50; ++i) {
      Eigen::Index best = 0;
      for (Eigen::Index c = 1; c < 4; ++c)
        if (h.weights().row(c).dot(x.row(i)) > h.weights().row(best).dot(x.row(i))) best = c;
      const bool ok = h.classes()[static_cast<std::size_t>(best)] == y[static_cast<std::size_t>(i)];
      wrong += ok ? 0 : 1;
      auto& e = tally[y[static_cast<std::size_t>(i)]];
      ++e.first;
      e.second += ok ? 1 : 0;
    }
    EvalReport r = evaluate(h, x, y);
    CHECK(r.zero_one_error == static_cast<double>(wrong) / 50.0);
    REQUIRE(r.per_class.size() == tally.size());
    for (const auto& c : r.per_class)
      CHECK(c.accuracy == static_cast<double>(tally[c.class_id].second) / tally[c.class_id].first);
  }
}

namespace {

LabeledDataset clusters(const std::vector<double>& centers, std::size_t per, std::uint64_t seed) {
  SynthSpec recipe{1, {}, seed};
  for (std::size_t i = 0; i < centers.size(); ++i)
    recipe.classes.push_back({Vector::Constant(1, centers[i]), 0.1, per, static_cast<ClassId>(i)});
  return generate(recipe);
}

}  // namespace

TEST_CASE("baselines") {
  LabeledDataset src = clusters({0.0, 10.0, 20.0, 30.0}, 5, 1);
  FeatureMatrix tgt(Matrix::Constant(3, 1, 20.0));
  CHECK(baseline_weights(Method::All, src, tgt, 0).values() == std::vector<double>(4, 0.25));
  ClassWeights mn = baseline_weights(Method::Mn, src, tgt, 0, 1);
  CHECK(mn[2] == 1.0);
  ClassWeights mn3 = baseline_weights(Method::Mn, src, tgt, 0);
  CHECK(mn3.support().size() == 3);
  CHECK(mn3[2] > 0.0);
  CHECK(baseline_weights(Method::Mn, src, tgt, 0, 10).support().size() == 4);
  for (std::uint64_t s = 0; s < 20; ++s) {
    ClassWeights a = baseline_weights(Method::Rnd, src, tgt, s), b = baseline_weights(Method::Rnd, src, tgt, s);
    CHECK(a.values() == b.values());
    CHECK_FALSE(a.support().empty());
    const double w = a[a.support().front()];
    for (std::size_t i : a.support()) CHECK(a[i] == w);
  }
  CHECK(error_kind_of([&] { baseline_weights(Method::Wass, src, tgt, 0); }) == ErrorKind::InvalidArgument);
}

TEST_CASE("fixed-budget resampling") {
  LabeledDataset src = clusters({0.0, 5.0}, 3, 2);
  std::vector<double> point(6, 0.0);
  point[0] = 1.0;
  LabeledDataset five = resample_fixed_budget(src, point, 5, 1);
  REQUIRE(five.size() == 5);
  for (std::size_t i = 0; i < 5; ++i) CHECK(five.features().row(i) == src.features().row(0));
  CHECK(error_kind_of([&] { resample_fixed_budget(src, point, 0, 1); }) == ErrorKind::InvalidArgument);
  CHECK(error_kind_of([&] { resample_fixed_budget(src, std::vector<double>(6, 0.0), 5, 1); }) ==
        ErrorKind::AllZeroProbabilities);
}

TEST_CASE("resampled class frequencies stay within 3 sigma") {
  LabeledDataset src = clusters({0.0, 5.0, 9.0}, 4, 3);
  ClassWeights w({0.2, 0.5, 0.3});
  auto probs = weights_to_sample_probabilities(w, src.labels());
  const std::size_t budget = 20000;
  LabeledDataset r = resample_fixed_budget(src, probs, budget, 17);
  std::vector<double> freq(3, 0.0);
  for (std::size_t i = 0; i < r.size(); ++i) freq[static_cast<std::size_t>(r.original_label(i))] += 1.0;
  for (std::size_t c = 0; c < 3; ++c) {
    const double sigma = std::sqrt(w[c] * (1 - w[c]) / budget);
    CHECK(std::abs(freq[c] / budget - w[c]) <= 3 * sigma);
  }
}

TEST_CASE("pipeline end to end on a planted scenario") {
  ScenarioConfig sc;
  sc.k_source = 4;
  sc.k_target = 2;
  sc.dim = 3;
  sc.per_class_source = 20;
  sc.per_class_target_train = 15;
  sc.per_class_target_test = 30;
  sc.seed = 5;
  Scenario s = make_scenario(sc);
  PipelineConfig cfg;
  cfg.pretrain.epochs = cfg.finetune.epochs = 50;
  PipelineResult r = run_pipeline(s.source, s.target_train, s.target_test, cfg);
  CHECK(r.solver == "exact");
  CHECK(r.weights.size() == 4);
  CHECK(r.support_size >= 1);
  CHECK(r.target_eval.n_eval == 60);
  CHECK(r.finetuned.head.classes() == s.target_train.class_ids());
  CHECK(r.target_eval.zero_one_error < 0.5);
  // Target anchors are the source classes WaSS should select.
  for (std::size_t i = 0; i < s.anchor.size(); ++i)
    if (s.anchor[i] >= 0) CHECK(r.weights[static_cast<std::size_t>(s.anchor[i])] > 0.0);

  PipelineConfig again = cfg;
  PipelineResult r2 = run_pipeline(s.source, s.target_train, s.target_test, again);
  CHECK(r2.finetuned.head.weights() == r.finetuned.head.weights());

  cfg.budget = 100;
  cfg.encoder_dim = 2;
  PipelineResult r3 = run_pipeline(s.source, s.target_train, s.target_test, cfg);
  CHECK(r3.pretrain_set.size() == 100);
  CHECK(r3.pretrained.encoder.projection.rows() == 2);
}

TEST_CASE("fine-tuning improves on the untrained head") {
  ScenarioConfig sc;
  sc.per_class_target_train = 100;
  sc.seed = 3;
  Scenario s = make_scenario(sc);
  PipelineConfig cfg;
  PipelineResult r = run_pipeline(s.source, s.target_train, s.target_test, cfg);
  SoftmaxHead untrained = SoftmaxHead::zeros(s.target_test.features().cols(), s.target_train.class_ids());
  const double before = evaluate(untrained, s.target_test.features().values(), s.target_test.original_labels()).zero_one_error;
  CHECK(r.target_eval.zero_one_error < before);
}

TEST_CASE("method names") {
  for (auto m : {Method::Wass, Method::WassSinkhorn, Method::All, Method::Rnd, Method::Mn})
    CHECK(parse_method(to_string(m)) == m);
  CHECK(error_kind_of([] { parse_method("best"); }) == ErrorKind::InvalidArgument);
}
