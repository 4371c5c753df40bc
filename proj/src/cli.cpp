#include "wass/cli.hpp"

#include "wass/bounds.hpp"
#include "wass/error.hpp"
#include "wass/experiment.hpp"
#include "wass/ot.hpp"
#include "wass/pipeline.hpp"
#include "wass/select.hpp"
#include "wass/synth.hpp"
#include "wass/verify.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <thread>

#ifndef WASS_VERSION
#define WASS_VERSION "0.0.0"
#endif

namespace wass::cli {

namespace {

using Json = nlohmann::ordered_json;
namespace fs = std::filesystem;

struct Globals {
  std::uint64_t seed = 0;
  std::size_t threads = 0;
  bool quiet = false;
};

/// Accumulates the run report: resolved configuration, timings, outputs, warnings.
class Report {
 public:
  explicit Report(std::string subcommand) : subcommand_(std::move(subcommand)) {}

  void echo(const CLI::App& app, const Globals& g) {
    for (const CLI::Option* opt : app.get_options()) {
      if (opt->get_name() == "--help" || opt->get_name() == "-h") continue;
      std::string key = opt->get_name();
      while (!key.empty() && key.front() == '-') key.erase(key.begin());
      const auto& res = opt->results();
      if (opt->get_type_size() == 0) config_[key] = opt->count() > 0;
      else if (!res.empty()) config_[key] = res.size() == 1 ? Json(res.front()) : Json(res);
      else if (!opt->get_default_str().empty()) config_[key] = opt->get_default_str();
      else config_[key] = nullptr;
    }
    config_["seed"] = g.seed;
    config_["threads"] = g.threads;
    config_["quiet"] = g.quiet;
  }

  void time(const std::string& phase, double ms) { timings_[phase] = ms; }
  void output(const fs::path& p) { outputs_.push_back(p.string()); }
  void warn(const std::string& w) { warnings_.push_back(w); }
  Json& result() { return result_; }
  const std::vector<std::string>& warnings() const { return warnings_; }

  Json to_json() const {
    Json j;
    j["tool"] = "wass";
    j["version"] = WASS_VERSION;
    j["subcommand"] = subcommand_;
    j["config"] = config_;
    j["timings_ms"] = timings_;
    j["outputs"] = outputs_;
    j["warnings"] = warnings_;
    j["result"] = result_;
    return j;
  }

 private:
  std::string subcommand_;
  Json config_ = Json::object();
  Json timings_ = Json::object();
  std::vector<std::string> outputs_;
  std::vector<std::string> warnings_;
  Json result_ = Json::object();
};

class Timer {
 public:
  Timer() : start_(std::chrono::steady_clock::now()) {}
  double ms() const {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::IoError, "cannot write " + path.string());
  out << text;
  if (!out) fail(ErrorKind::IoError, "failed writing " + path.string());
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::IoError, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// Finishes a subcommand: optional report file, JSON on stdout unless quiet,
/// warnings on stderr.
void finish(Report& report, const std::string& report_path, const Globals& g, std::ostream& out,
            std::ostream& err) {
  for (const auto& w : report.warnings()) err << "warning: " << w << '\n';
  if (!report_path.empty()) report.output(report_path);
  const std::string text = report.to_json().dump(2) + "\n";
  if (!report_path.empty()) write_text(report_path, text);
  if (!g.quiet) out << text;
}

Json weights_json(const ClassWeights& w, std::span<const ClassId> ids) {
  return Json::parse(class_weights_json(w, ids));
}

Json solution_json(const ClassWeightSolution& s, std::span<const ClassId> ids) {
  Json j;
  j["solver"] = s.solver;
  j["objective"] = s.objective;
  j["dual_objective"] = s.dual_objective;
  j["duality_gap"] = s.duality_gap;
  j["support_size"] = s.support_size;
  j["iterations"] = s.iterations;
  j["converged"] = s.converged;
  j["weights"] = weights_json(s.weights.clamped(), ids);
  return j;
}

/// Reads {"weights": {"<id>": w, ...}} and returns per-row masses w_i / n_i.
std::vector<double> masses_from_weights_file(const fs::path& path, const LabeledDataset& data) {
  Json j;
  try {
    j = Json::parse(read_text(path));
  } catch (const Json::exception& e) {
    fail(ErrorKind::MalformedFile, path.string() + ": " + e.what());
  }
  if (!j.contains("weights") || !j["weights"].is_object())
    fail(ErrorKind::MalformedFile, path.string() + ": expected an object under 'weights'");
  std::vector<double> w(data.num_classes(), 0.0);
  for (const auto& [key, value] : j["weights"].items()) {
    ClassId id = 0;
    try {
      id = std::stoll(key);
    } catch (const std::exception&) {
      fail(ErrorKind::MalformedFile, "weight key '" + key + "' is not a class id");
    }
    auto it = std::find(data.class_ids().begin(), data.class_ids().end(), id);
    if (it == data.class_ids().end()) fail(ErrorKind::UnknownLabel, "class " + key + " is not in the source labels");
    w[static_cast<std::size_t>(it - data.class_ids().begin())] = value.get<double>();
  }
  return weights_to_sample_probabilities(ClassWeights(w), data.labels());
}

// Subcommands -----------------------------------------------------------------

struct DistanceArgs {
  std::string source, target, format = "auto", out, out_format = "csv", report;
};

void cmd_distance(const DistanceArgs& a, Report& r) {
  Timer t;
  const MatrixFormat fmt = parse_matrix_format(a.format);
  const DistanceMatrix d = pairwise_distances(load_feature_matrix(a.source, fmt), load_feature_matrix(a.target, fmt));
  r.time("distance", t.ms());
  r.result() = {{"rows", d.rows()}, {"cols", d.cols()}, {"mean", d.mean()}, {"max", d.max()}};
  if (!a.out.empty()) {
    save_matrix(d.values(), a.out, parse_matrix_format(a.out_format));
    r.output(a.out);
  }
}

struct OtArgs {
  std::string cost, mu, nu, source, target, format = "auto", out_plan, report;
};

void cmd_ot(const OtArgs& a, Report& r) {
  Timer t;
  const MatrixFormat fmt = parse_matrix_format(a.format);
  Matrix cost;
  if (!a.cost.empty()) {
    if (!a.source.empty() || !a.target.empty())
      fail(ErrorKind::InvalidArgument, "give either --cost or --source/--target, not both");
    cost = load_matrix(a.cost, fmt);
  } else {
    if (a.source.empty() || a.target.empty())
      fail(ErrorKind::InvalidArgument, "need --cost or both --source and --target");
    cost = pairwise_distances(load_feature_matrix(a.source, fmt), load_feature_matrix(a.target, fmt)).values();
  }
  const Vector mu = a.mu.empty() ? uniform_marginal(static_cast<std::size_t>(cost.rows())) : load_vector(a.mu);
  const Vector nu = a.nu.empty() ? uniform_marginal(static_cast<std::size_t>(cost.cols())) : load_vector(a.nu);
  const OtResult res = solve_exact_ot({cost, mu, nu});
  r.time("solve", t.ms());
  r.result() = {{"w1", res.plan.objective},
                {"dual_objective", res.dual_objective},
                {"duality_gap", res.duality_gap},
                {"iterations", res.iterations}};
  if (!a.out_plan.empty()) {
    save_matrix(res.plan.plan, a.out_plan, MatrixFormat::Csv);
    r.output(a.out_plan);
  }
}

struct SelectArgs {
  std::string source, source_labels, target, format = "auto", out_weights, out_plan, solver = "auto", report;
  std::optional<double> epsilon, sinkhorn_tol;
  std::optional<std::size_t> sinkhorn_max_iters;
};

void cmd_select(const SelectArgs& a, Report& r) {
  Timer t;
  const MatrixFormat fmt = parse_matrix_format(a.format);
  const LabeledDataset source = load_dataset(a.source, a.source_labels, fmt);
  const FeatureMatrix target = load_feature_matrix(a.target, fmt);
  r.time("load", t.ms());
  Timer ts;
  SelectOptions opts;
  opts.solver = parse_solver_kind(a.solver);
  opts.epsilon = a.epsilon;
  opts.sinkhorn_tol = a.sinkhorn_tol;
  opts.sinkhorn_max_iters = a.sinkhorn_max_iters;
  const ClassWeightSolution sol = select_class_weights(source, target, opts);
  r.time("solve", ts.ms());
  for (const auto& w : sol.warnings) r.warn(w);
  r.result() = solution_json(sol, source.class_ids());
  save_class_weights(sol.weights.clamped(), source.class_ids(), a.out_weights);
  r.output(a.out_weights);
  if (!a.out_plan.empty()) {
    save_matrix(sol.plan.plan, a.out_plan, MatrixFormat::Csv);
    r.output(a.out_plan);
  }
}

struct PipelineArgs {
  std::string source, source_labels, target_train, target_train_labels, target_test, target_test_labels;
  std::string format = "auto", method = "wass", solver = "auto", report, out_dir;
  std::size_t budget = 0, epochs = 200, encoder_dim = 0, mn_top = 3, batch_size = 0;
  double lr = 0.5, l2 = 0.0;
  bool bound = false;
};

void cmd_pipeline(const PipelineArgs& a, const Globals& g, Report& r) {
  Timer t;
  const MatrixFormat fmt = parse_matrix_format(a.format);
  const LabeledDataset source = load_dataset(a.source, a.source_labels, fmt);
  const LabeledDataset train = load_dataset(a.target_train, a.target_train_labels, fmt);
  const LabeledDataset test = load_dataset(a.target_test, a.target_test_labels, fmt);
  r.time("load", t.ms());
  PipelineConfig pc;
  pc.method = parse_method(a.method);
  pc.budget = a.budget;
  pc.encoder_dim = a.encoder_dim;
  pc.mn_top = a.mn_top;
  pc.seed = g.seed;
  pc.select.solver = parse_solver_kind(a.solver);
  pc.pretrain.epochs = pc.finetune.epochs = a.epochs;
  pc.pretrain.learning_rate = pc.finetune.learning_rate = a.lr;
  pc.pretrain.batch_size = pc.finetune.batch_size = a.batch_size;
  pc.pretrain.l2_penalty = pc.finetune.l2_penalty = a.l2;
  pc.pretrain.seed = pc.finetune.seed = g.seed;
  const PipelineResult res = run_pipeline(source, train, test, pc);
  for (const auto& [phase, ms] : res.timings_ms) r.time(phase, ms);
  for (const auto& w : res.warnings) r.warn(w);

  Json j;
  j["method"] = to_string(pc.method);
  j["solver"] = res.solver;
  j["w1_objective"] = res.w1_objective;
  j["support_size"] = res.support_size;
  j["weights"] = weights_json(res.weights, res.source_class_ids);
  j["eval"] = Json::parse(eval_report_json(res.target_eval));
  j["pretrain_epochs"] = res.pretrained.epochs_run;
  j["finetune_epochs"] = res.finetuned.epochs_run;
  j["pretrain_loss"] = res.pretrained.loss_history.empty() ? 0.0 : res.pretrained.loss_history.back();
  j["finetune_loss"] = res.finetuned.loss_history.empty() ? 0.0 : res.finetuned.loss_history.back();
  if (a.bound) {
    Timer tb;
    j["bound"] = Json::parse(bound_report_json(pipeline_bound_report(res, test)));
    r.time("bound", tb.ms());
  }
  r.result() = std::move(j);

  if (!a.out_dir.empty()) {
    const fs::path dir = a.out_dir;
    fs::create_directories(dir);
    save_class_weights(res.weights, res.source_class_ids, dir / "weights.json");
    r.output(dir / "weights.json");
    save_head(res.pretrained.head, dir / "pretrained_head.json");
    r.output(dir / "pretrained_head.json");
    save_head(res.finetuned.head, dir / "finetuned_head.json");
    r.output(dir / "finetuned_head.json");
    if (!res.pretrained.encoder.identity()) {
      write_text(dir / "encoder.json", encoder_to_json(res.pretrained.encoder) + "\n");
      r.output(dir / "encoder.json");
    }
  }
}

struct BoundArgs {
  std::string pretrained, finetuned, source, source_labels, target, target_labels, encoder, class_weights;
  std::string format = "auto", report;
};

void cmd_bound(const BoundArgs& a, Report& r) {
  Timer t;
  const MatrixFormat fmt = parse_matrix_format(a.format);
  const SoftmaxHead pre = load_head(a.pretrained), fine = load_head(a.finetuned);
  LabeledDataset source = load_dataset(a.source, a.source_labels, fmt);
  LabeledDataset target = load_dataset(a.target, a.target_labels, fmt);
  if (!a.encoder.empty()) {
    const LinearEncoder enc = encoder_from_json(read_text(a.encoder));
    source = LabeledDataset(enc.encode(source.features()), source.label_set());
    target = LabeledDataset(enc.encode(target.features()), target.label_set());
  }
  std::vector<double> masses = a.class_weights.empty()
                                   ? std::vector<double>(source.size(), 1.0 / static_cast<double>(source.size()))
                                   : masses_from_weights_file(a.class_weights, source);
  const BoundReport br = transfer_bound_report(pre, fine, DiscreteJointDistribution::from_dataset(source, masses),
                                               DiscreteJointDistribution::from_dataset(target));
  r.time("bound", t.ms());
  r.result() = Json::parse(bound_report_json(br));
}

struct VerifyArgs {
  std::size_t trials = 1000;
  bool strict = false;
  std::string report;
};

int cmd_verify(const VerifyArgs& a, const Globals& g, Report& r) {
  Timer t;
  const VerifyReport vr = run_property_suites(g.seed, a.trials);
  r.time("verify", t.ms());
  r.result() = Json::parse(verify_report_json(vr));
  for (const auto& s : vr.suites)
    if (!s.pass()) {
      std::ostringstream msg;
      msg << "property suite '" << s.name << "' failed: worst " << s.worst << " > tolerance " << s.tolerance;
      r.warn(msg.str());
    }
  return a.strict && !vr.all_pass() ? 1 : 0;
}

struct SynthArgs {
  std::string kind = "dda", out_dir, format = "binary", report;
  std::size_t k_source = 6, k_target = 3, overlap = 0, dim = 8, per_class = 40, per_class_target_train = 20,
              per_class_target_test = 100;
  std::optional<std::size_t> near;
  double separation = 4.0, stddev = 1.0;
};

void cmd_synth(const SynthArgs& a, const Globals& g, Report& r) {
  Timer t;
  ScenarioConfig c;
  c.kind = parse_scenario_kind(a.kind);
  c.k_source = a.k_source;
  c.k_target = a.k_target;
  c.overlap = a.overlap;
  c.separation = a.separation;
  c.dim = a.dim;
  c.stddev = a.stddev;
  c.per_class_source = a.per_class;
  c.per_class_target_train = a.per_class_target_train;
  c.per_class_target_test = a.per_class_target_test;
  c.near = a.near;
  c.seed = g.seed;
  const Scenario sc = make_scenario(c);
  const MatrixFormat fmt = parse_matrix_format(a.format);
  if (fmt == MatrixFormat::Auto) fail(ErrorKind::InvalidArgument, "synth needs --format binary or csv");
  const std::string ext = fmt == MatrixFormat::Binary ? ".wsf" : ".csv";
  const fs::path dir = a.out_dir;
  fs::create_directories(dir);
  auto write = [&](const LabeledDataset& d, const std::string& name) {
    save_feature_matrix(d.features(), dir / (name + ext), fmt);
    r.output(dir / (name + ext));
    const auto ids = d.original_labels();
    save_labels(ids, dir / (name + ".lbl"));
    r.output(dir / (name + ".lbl"));
  };
  write(sc.source, "source");
  write(sc.target_train, "target_train");
  write(sc.target_test, "target_test");
  r.time("generate", t.ms());
  Json anchors = Json::array();
  for (std::size_t i = 0; i < sc.target_ids.size(); ++i)
    anchors.push_back({{"target_class", sc.target_ids[i]},
                       {"source_class", sc.anchor[i] >= 0 ? Json(sc.anchor[i]) : Json()}});
  r.result() = {{"source_rows", sc.source.size()},
                {"target_train_rows", sc.target_train.size()},
                {"target_test_rows", sc.target_test.size()},
                {"near_count", sc.near_count},
                {"anchors", anchors}};
}

struct ExperimentArgs {
  std::string config, out, report;
};

void cmd_experiment(const ExperimentArgs& a, const Globals& g, Report& r) {
  Timer t;
  ExperimentConfig cfg = load_experiment_config(a.config);
  if (g.threads > 0) cfg.threads = g.threads;
  const ExperimentResult res = run_experiment(cfg);
  r.time("experiment", t.ms());
  const std::string csv = experiment_csv(res);
  if (!a.out.empty()) {
    write_text(a.out, csv);
    r.output(a.out);
  }
  Json summary = Json::array();
  for (const auto& s : res.summary)
    summary.push_back({{"scenario", s.scenario},
                       {"method", s.method},
                       {"mean_accuracy", s.mean_accuracy},
                       {"std_accuracy", s.std_accuracy},
                       {"mean_w1", s.mean_w1},
                       {"runs_ok", s.runs_ok},
                       {"runs", s.runs}});
  std::size_t failed = 0;
  for (const auto& row : res.rows)
    if (row.status != "ok") ++failed;
  if (failed > 0) r.warn(std::to_string(failed) + " experiment cells failed; see the status column");
  r.result() = {{"experiment", Json::parse(experiment_config_json(cfg))}, {"summary", summary}};
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Class-weight selection by Wasserstein distance, transfer pipeline and bound checks", "wass"};
  app.require_subcommand(1);
  app.option_defaults()->always_capture_default();
  app.set_version_flag("--version", WASS_VERSION);
  Globals g;
  app.add_option("--seed", g.seed, "Random seed");
  app.add_option("--threads", g.threads, "Worker threads for experiments (0: all cores)");
  app.add_flag("--quiet", g.quiet, "Do not print the JSON report on stdout");

  const std::vector<std::string> formats{"auto", "binary", "wsf", "csv"};

  DistanceArgs da;
  auto* distance = app.add_subcommand("distance", "Pairwise Euclidean distances between two feature files");
  distance->add_option("--source", da.source, "Source features")->required();
  distance->add_option("--target", da.target, "Target features")->required();
  distance->add_option("--format", da.format, "Input format")->check(CLI::IsMember(formats));
  distance->add_option("--out", da.out, "Distance matrix output");
  distance->add_option("--out-format", da.out_format, "Output format")->check(CLI::IsMember({"binary", "csv"}));
  distance->add_option("--report", da.report, "Run report JSON");

  OtArgs oa;
  auto* ot = app.add_subcommand("ot", "Exact W1 between two discrete distributions");
  ot->add_option("--cost", oa.cost, "Cost matrix (binary or CSV)");
  ot->add_option("--mu", oa.mu, "Source marginal (CSV, default uniform)");
  ot->add_option("--nu", oa.nu, "Target marginal (CSV, default uniform)");
  ot->add_option("--source", oa.source, "Source features (Euclidean cost)");
  ot->add_option("--target", oa.target, "Target features (Euclidean cost)");
  ot->add_option("--format", oa.format, "Input format")->check(CLI::IsMember(formats));
  ot->add_option("--out-plan", oa.out_plan, "Optimal plan as CSV");
  ot->add_option("--report", oa.report, "Run report JSON");

  SelectArgs sa;
  auto* select = app.add_subcommand("select", "Class weights closest in W1 to the target");
  select->add_option("--source", sa.source, "Source features")->required();
  select->add_option("--source-labels", sa.source_labels, "Source labels")->required();
  select->add_option("--target", sa.target, "Target features")->required();
  select->add_option("--format", sa.format, "Input format")->check(CLI::IsMember(formats));
  select->add_option("--out-weights", sa.out_weights, "Class weights JSON")->required();
  select->add_option("--out-plan", sa.out_plan, "Transport plan as CSV");
  select->add_option("--solver", sa.solver, "auto, exact or sinkhorn")->check(CLI::IsMember({"auto", "exact", "sinkhorn"}));
  select->add_option("--epsilon", sa.epsilon, "Sinkhorn regularization (default 0.01 mean distance)")->check(CLI::PositiveNumber);
  select->add_option("--sinkhorn-tol", sa.sinkhorn_tol, "Sinkhorn marginal tolerance")->check(CLI::PositiveNumber);
  select->add_option("--sinkhorn-max-iters", sa.sinkhorn_max_iters, "Sinkhorn iteration cap")->check(CLI::PositiveNumber);
  select->add_option("--report", sa.report, "Run report JSON");

  PipelineArgs pa;
  auto* pipeline = app.add_subcommand("pipeline", "Select, pre-train, fine-tune and evaluate");
  pipeline->add_option("--source", pa.source, "Source features")->required();
  pipeline->add_option("--source-labels", pa.source_labels, "Source labels")->required();
  pipeline->add_option("--target-train", pa.target_train, "Labeled target features for fine-tuning")->required();
  pipeline->add_option("--target-train-labels", pa.target_train_labels, "Target train labels")->required();
  pipeline->add_option("--target-test", pa.target_test, "Held-out target features")->required();
  pipeline->add_option("--target-test-labels", pa.target_test_labels, "Held-out target labels")->required();
  pipeline->add_option("--format", pa.format, "Input format")->check(CLI::IsMember(formats));
  pipeline->add_option("--method", pa.method, "wass, wass_sinkhorn, all, rnd or mn")
      ->check(CLI::IsMember({"wass", "wass_sinkhorn", "all", "rnd", "mn"}));
  pipeline->add_option("--solver", pa.solver, "Solver for wass")->check(CLI::IsMember({"auto", "exact", "sinkhorn"}));
  pipeline->add_option("--budget", pa.budget, "Source draws for pre-training (0: importance weights)");
  pipeline->add_option("--epochs", pa.epochs, "Training epochs")->check(CLI::PositiveNumber);
  pipeline->add_option("--lr", pa.lr, "Learning rate")->check(CLI::PositiveNumber);
  pipeline->add_option("--batch-size", pa.batch_size, "Mini-batch size (0: full batch)");
  pipeline->add_option("--l2", pa.l2, "L2 penalty")->check(CLI::NonNegativeNumber);
  pipeline->add_option("--encoder-dim", pa.encoder_dim, "Width of the learned linear encoder (0: none)");
  pipeline->add_option("--mn-top", pa.mn_top, "Classes kept by the mn baseline")->check(CLI::PositiveNumber);
  pipeline->add_flag("--bound", pa.bound, "Add the transfer bound report");
  pipeline->add_option("--out-dir", pa.out_dir, "Directory for weights, heads and encoder");
  pipeline->add_option("--report", pa.report, "Run report JSON");

  BoundArgs ba;
  auto* bound = app.add_subcommand("bound", "Transfer bound for a pre-trained and a fine-tuned head");
  bound->add_option("--pretrained-head", ba.pretrained, "Pre-trained head JSON")->required();
  bound->add_option("--finetuned-head", ba.finetuned, "Fine-tuned head JSON")->required();
  bound->add_option("--source", ba.source, "Source features")->required();
  bound->add_option("--source-labels", ba.source_labels, "Source labels")->required();
  bound->add_option("--target", ba.target, "Target features")->required();
  bound->add_option("--target-labels", ba.target_labels, "Target labels")->required();
  bound->add_option("--encoder", ba.encoder, "Encoder JSON applied to both feature sets");
  bound->add_option("--class-weights", ba.class_weights, "Class weights JSON reweighting the source");
  bound->add_option("--format", ba.format, "Input format")->check(CLI::IsMember(formats));
  bound->add_option("--report", ba.report, "Run report JSON");

  VerifyArgs va;
  auto* verify = app.add_subcommand("verify", "Randomized property suites");
  verify->add_option("--trials", va.trials, "Scale of the suites")->check(CLI::PositiveNumber);
  verify->add_flag("--strict", va.strict, "Exit 1 if any suite fails");
  verify->add_option("--report", va.report, "Run report JSON");

  SynthArgs ya;
  auto* synth = app.add_subcommand("synth", "Write a synthetic source / target scenario");
  synth->add_option("--kind", ya.kind, "dda or oda")->check(CLI::IsMember({"dda", "oda"}));
  synth->add_option("--k-source", ya.k_source, "Source classes")->check(CLI::PositiveNumber);
  synth->add_option("--k-target", ya.k_target, "Target classes")->check(CLI::PositiveNumber);
  synth->add_option("--overlap", ya.overlap, "Target classes shared with the source (oda)");
  synth->add_option("--near", ya.near, "Target classes placed next to a source class");
  synth->add_option("--separation", ya.separation, "Minimum distance between class means")->check(CLI::PositiveNumber);
  synth->add_option("--stddev", ya.stddev, "Per-class standard deviation")->check(CLI::PositiveNumber);
  synth->add_option("--dim", ya.dim, "Feature dimension")->check(CLI::Range(2, 1 << 20));
  synth->add_option("--per-class", ya.per_class, "Source samples per class")->check(CLI::PositiveNumber);
  synth->add_option("--per-class-target-train", ya.per_class_target_train, "Target train samples per class")
      ->check(CLI::PositiveNumber);
  synth->add_option("--per-class-target-test", ya.per_class_target_test, "Target test samples per class")
      ->check(CLI::PositiveNumber);
  synth->add_option("--format", ya.format, "binary or csv")->check(CLI::IsMember({"binary", "csv"}));
  synth->add_option("--out-dir", ya.out_dir, "Output directory")->required();
  synth->add_option("--report", ya.report, "Run report JSON");

  ExperimentArgs ea;
  auto* experiment = app.add_subcommand("experiment", "Scenario x method x seed accuracy table");
  experiment->add_option("--config", ea.config, "Experiment file")->required();
  experiment->add_option("--out", ea.out, "Results CSV");
  experiment->add_option("--report", ea.report, "Run report JSON");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForVersion&) {
    out << WASS_VERSION << '\n';
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n";
    const auto subs = app.get_subcommands();
    err << (subs.empty() ? app.help() : subs.front()->help());
    return 2;
  }

  CLI::App* sub = app.get_subcommands().front();
  Report report(sub->get_name());
  report.echo(*sub, g);
  try {
    int code = 0;
    std::string report_path;
    if (sub == distance) {
      cmd_distance(da, report);
      report_path = da.report;
    } else if (sub == ot) {
      cmd_ot(oa, report);
      report_path = oa.report;
    } else if (sub == select) {
      cmd_select(sa, report);
      report_path = sa.report;
    } else if (sub == pipeline) {
      cmd_pipeline(pa, g, report);
      report_path = pa.report;
    } else if (sub == bound) {
      cmd_bound(ba, report);
      report_path = ba.report;
    } else if (sub == verify) {
      code = cmd_verify(va, g, report);
      report_path = va.report;
    } else if (sub == synth) {
      cmd_synth(ya, g, report);
      report_path = ya.report;
    } else if (sub == experiment) {
      cmd_experiment(ea, g, report);
      report_path = ea.report;
    }
    finish(report, report_path, g, out, err);
    return code;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace wass::cli
