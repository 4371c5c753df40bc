#include "wass/synth.hpp"

#include "wass/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace wass {

LabeledDataset generate(const SynthSpec& recipe) {
  if (recipe.dim < 1) fail(ErrorKind::InvalidArgument, "dim must be >= 1");
  if (recipe.classes.empty()) fail(ErrorKind::InvalidArgument, "need at least one class");
  std::size_t total = 0;
  for (const auto& c : recipe.classes) {
    if (static_cast<std::size_t>(c.mean.size()) != recipe.dim)
      fail(ErrorKind::DimensionMismatch, "class mean has the wrong dimension");
    if (!(c.stddev > 0.0)) fail(ErrorKind::InvalidArgument, "stddev must be > 0");
    if (c.count < 1) fail(ErrorKind::InvalidArgument, "sample counts must be >= 1");
    total += c.count;
  }
  std::mt19937_64 rng(recipe.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix x(static_cast<Eigen::Index>(total), static_cast<Eigen::Index>(recipe.dim));
  std::vector<ClassId> ids;
  ids.reserve(total);
  Eigen::Index row = 0;
  for (const auto& c : recipe.classes) {
    for (std::size_t s = 0; s < c.count; ++s, ++row) {
      for (Eigen::Index d = 0; d < x.cols(); ++d) x(row, d) = c.mean[d] + c.stddev * normal(rng);
      ids.push_back(c.id);
    }
  }
  return LabeledDataset(FeatureMatrix(std::move(x)), densify_labels(ids));
}

ScenarioKind parse_scenario_kind(const std::string& name) {
  if (name == "dda") return ScenarioKind::Dda;
  if (name == "oda") return ScenarioKind::Oda;
  fail(ErrorKind::InvalidArgument, "unknown scenario kind '" + name + "' (expected dda or oda)");
}

std::string to_string(ScenarioKind kind) { return kind == ScenarioKind::Dda ? "dda" : "oda"; }

void ScenarioConfig::validate() const {
  if (k_source < 1 || k_target < 1) fail(ErrorKind::InvalidArgument, "k_source and k_target must be >= 1");
  if (kind == ScenarioKind::Dda && overlap != 0)
    fail(ErrorKind::InvalidOverlap, "dda scenarios have no overlapping classes");
  if (kind == ScenarioKind::Oda && (overlap < 1 || overlap > std::min(k_source, k_target)))
    fail(ErrorKind::InvalidOverlap, "oda overlap must lie in [1, min(k_source, k_target)]");
  if (dim < 2) fail(ErrorKind::InvalidArgument, "scenario dim must be >= 2");
  if (!(separation > 0.0)) fail(ErrorKind::InvalidArgument, "separation must be > 0");
  if (!(stddev > 0.0)) fail(ErrorKind::InvalidArgument, "stddev must be > 0");
  if (per_class_source < 1 || per_class_target_train < 1 || per_class_target_test < 1)
    fail(ErrorKind::InvalidArgument, "per-class sample counts must be >= 1");
  if (near && *near > std::min(k_target - overlap, k_source - overlap))
    fail(ErrorKind::InvalidArgument, "too many near target classes requested");
}

namespace {

Vector random_direction(std::mt19937_64& rng, std::size_t dim) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector v(static_cast<Eigen::Index>(dim));
  do {
    for (Eigen::Index d = 0; d < v.size(); ++d) v[d] = normal(rng);
  } while (v.norm() < 1e-12);
  return v / v.norm();
}

}  // namespace

Scenario make_scenario(const ScenarioConfig& config) {
  config.validate();
  const std::size_t fresh = config.k_target - config.overlap;
  const std::size_t near = config.near.value_or(std::min(fresh, config.k_source - config.overlap));
  const std::size_t far = fresh - near;
  const std::size_t spaced = config.k_source + far;
  const double radius = config.separation *
                        std::max(1.0, std::pow(static_cast<double>(spaced) / 2.0, 1.0 / static_cast<double>(config.dim - 1)));

  std::mt19937_64 rng(config.seed);
  std::vector<Vector> spaced_means;
  std::size_t rejections = 0;
  while (spaced_means.size() < spaced) {
    Vector candidate = radius * random_direction(rng, config.dim);
    bool ok = std::all_of(spaced_means.begin(), spaced_means.end(),
                          [&](const Vector& m) { return (m - candidate).norm() >= config.separation; });
    if (ok) {
      spaced_means.push_back(std::move(candidate));
    } else if (++rejections > 10000) {
      fail(ErrorKind::InvalidArgument, "could not place class means with the requested separation");
    }
  }

  Matrix source_means(static_cast<Eigen::Index>(config.k_source), static_cast<Eigen::Index>(config.dim));
  Matrix target_means(static_cast<Eigen::Index>(config.k_target), static_cast<Eigen::Index>(config.dim));
  std::vector<ClassId> target_ids, anchor;
  for (std::size_t i = 0; i < config.k_source; ++i) source_means.row(static_cast<Eigen::Index>(i)) = spaced_means[i];

  // Near targets sit next to distinct non-overlapping source classes.
  std::vector<std::size_t> candidates(config.k_source - config.overlap);
  std::iota(candidates.begin(), candidates.end(), config.overlap);
  std::shuffle(candidates.begin(), candidates.end(), rng);

  std::size_t t = 0;
  for (; t < config.overlap; ++t) {
    target_means.row(static_cast<Eigen::Index>(t)) = source_means.row(static_cast<Eigen::Index>(t));
    target_ids.push_back(static_cast<ClassId>(t));
    anchor.push_back(static_cast<ClassId>(t));
  }
  for (std::size_t i = 0; i < near; ++i, ++t) {
    const std::size_t s = candidates[i];
    Vector mean = spaced_means[s] + (config.separation / 4.0) * random_direction(rng, config.dim);
    target_means.row(static_cast<Eigen::Index>(t)) = mean;
    target_ids.push_back(static_cast<ClassId>(config.k_source + t - config.overlap));
    anchor.push_back(static_cast<ClassId>(s));
  }
  for (std::size_t i = 0; i < far; ++i, ++t) {
    target_means.row(static_cast<Eigen::Index>(t)) = spaced_means[config.k_source + i];
    target_ids.push_back(static_cast<ClassId>(config.k_source + t - config.overlap));
    anchor.push_back(-1);
  }

  auto make_spec = [&](const Matrix& means, const std::vector<ClassId>& ids, std::size_t count, std::uint64_t seed) {
    SynthSpec recipe{config.dim, {}, seed};
    for (Eigen::Index i = 0; i < means.rows(); ++i)
      recipe.classes.push_back({means.row(i).transpose(), config.stddev, count, ids[static_cast<std::size_t>(i)]});
    return recipe;
  };
  std::vector<ClassId> source_ids(config.k_source);
  std::iota(source_ids.begin(), source_ids.end(), 0);
  const std::uint64_t base = rng();
  LabeledDataset source = generate(make_spec(source_means, source_ids, config.per_class_source, base + 1));
  LabeledDataset train = generate(make_spec(target_means, target_ids, config.per_class_target_train, base + 2));
  LabeledDataset test = generate(make_spec(target_means, target_ids, config.per_class_target_test, base + 3));
  return Scenario{std::move(source), std::move(train), std::move(test), std::move(source_means),
                  std::move(target_means), std::move(target_ids), std::move(anchor), near};
}

}  // namespace wass
