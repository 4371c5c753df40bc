#include "wass/experiment.hpp"

#include "wass/error.hpp"

#include <json.hpp>

#include <atomic>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

namespace wass {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, sep)) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

template <typename T>
T parse_number(const std::string& value, const std::string& key, std::size_t line) {
  T out{};
  auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || ptr != value.data() + value.size())
    fail(ErrorKind::InvalidArgument,
         "line " + std::to_string(line) + ": '" + key + "' expects a number, got '" + value + "'");
  return out;
}

std::vector<std::uint64_t> parse_seeds(const std::string& value, std::size_t line) {
  std::vector<std::uint64_t> seeds;
  for (const auto& part : split(value, ',')) {
    const auto dash = part.find('-');
    if (dash == std::string::npos) {
      seeds.push_back(parse_number<std::uint64_t>(part, "seeds", line));
      continue;
    }
    auto lo = parse_number<std::uint64_t>(trim(part.substr(0, dash)), "seeds", line);
    auto hi = parse_number<std::uint64_t>(trim(part.substr(dash + 1)), "seeds", line);
    if (hi < lo) fail(ErrorKind::InvalidArgument, "line " + std::to_string(line) + ": empty seed range");
    for (std::uint64_t s = lo; s <= hi; ++s) seeds.push_back(s);
  }
  return seeds;
}

void apply_experiment_key(ExperimentConfig& cfg, const std::string& key, const std::string& value,
                          std::size_t line) {
  if (key == "methods") {
    cfg.methods.clear();
    for (const auto& m : split(value, ',')) cfg.methods.push_back(parse_method(m));
  } else if (key == "seeds") {
    cfg.seeds = parse_seeds(value, line);
  } else if (key == "budget") {
    cfg.budget = parse_number<std::size_t>(value, key, line);
  } else if (key == "encoder_dim") {
    cfg.encoder_dim = parse_number<std::size_t>(value, key, line);
  } else if (key == "mn_top") {
    cfg.mn_top = parse_number<std::size_t>(value, key, line);
  } else if (key == "threads") {
    cfg.threads = parse_number<std::size_t>(value, key, line);
  } else if (key == "epochs") {
    cfg.pretrain.epochs = cfg.finetune.epochs = parse_number<std::size_t>(value, key, line);
  } else if (key == "learning_rate") {
    cfg.pretrain.learning_rate = cfg.finetune.learning_rate = parse_number<double>(value, key, line);
  } else if (key == "batch_size") {
    cfg.pretrain.batch_size = cfg.finetune.batch_size = parse_number<std::size_t>(value, key, line);
  } else if (key == "l2_penalty") {
    cfg.pretrain.l2_penalty = cfg.finetune.l2_penalty = parse_number<double>(value, key, line);
  } else if (key == "early_stop_patience") {
    cfg.pretrain.early_stop_patience = cfg.finetune.early_stop_patience = parse_number<std::size_t>(value, key, line);
  } else if (key == "finetune_epochs") {
    cfg.finetune.epochs = parse_number<std::size_t>(value, key, line);
  } else if (key == "finetune_learning_rate") {
    cfg.finetune.learning_rate = parse_number<double>(value, key, line);
  } else {
    fail(ErrorKind::InvalidArgument, "line " + std::to_string(line) + ": unknown [experiment] key '" + key + "'");
  }
}

void apply_scenario_key(ScenarioConfig& cfg, const std::string& key, const std::string& value, std::size_t line) {
  if (key == "kind") cfg.kind = parse_scenario_kind(value);
  else if (key == "k_source") cfg.k_source = parse_number<std::size_t>(value, key, line);
  else if (key == "k_target") cfg.k_target = parse_number<std::size_t>(value, key, line);
  else if (key == "overlap") cfg.overlap = parse_number<std::size_t>(value, key, line);
  else if (key == "near") cfg.near = parse_number<std::size_t>(value, key, line);
  else if (key == "separation") cfg.separation = parse_number<double>(value, key, line);
  else if (key == "dim") cfg.dim = parse_number<std::size_t>(value, key, line);
  else if (key == "stddev") cfg.stddev = parse_number<double>(value, key, line);
  else if (key == "per_class_source") cfg.per_class_source = parse_number<std::size_t>(value, key, line);
  else if (key == "per_class_target_train") cfg.per_class_target_train = parse_number<std::size_t>(value, key, line);
  else if (key == "per_class_target_test") cfg.per_class_target_test = parse_number<std::size_t>(value, key, line);
  else fail(ErrorKind::InvalidArgument, "line " + std::to_string(line) + ": unknown scenario key '" + key + "'");
}

std::string num(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c == '\n' ? ' ' : c;
  }
  return out + "\"";
}

}  // namespace

ExperimentConfig parse_experiment_config(const std::string& text) {
  ExperimentConfig cfg;
  cfg.methods = {Method::Wass, Method::All, Method::Rnd, Method::Mn};
  enum class Section { None, Experiment, Scenario } section = Section::None;
  std::istringstream in(text);
  std::string raw;
  std::size_t line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const auto comment = raw.find_first_of("#;");
    std::string s = trim(comment == std::string::npos ? raw : raw.substr(0, comment));
    if (s.empty()) continue;
    if (s.front() == '[') {
      if (s.back() != ']') fail(ErrorKind::InvalidArgument, "line " + std::to_string(line) + ": unterminated section");
      std::string name = trim(s.substr(1, s.size() - 2));
      if (name == "experiment") {
        section = Section::Experiment;
      } else if (name.rfind("scenario", 0) == 0) {
        std::string sname = trim(name.substr(8));
        if (sname.empty()) fail(ErrorKind::InvalidArgument, "line " + std::to_string(line) + ": scenario needs a name");
        for (const auto& sc : cfg.scenarios)
          if (sc.name == sname) fail(ErrorKind::InvalidArgument, "duplicate scenario '" + sname + "'");
        cfg.scenarios.push_back({sname, ScenarioConfig{}});
        section = Section::Scenario;
      } else {
        fail(ErrorKind::InvalidArgument, "line " + std::to_string(line) + ": unknown section [" + name + "]");
      }
      continue;
    }
    const auto eq = s.find('=');
    if (eq == std::string::npos) fail(ErrorKind::InvalidArgument, "line " + std::to_string(line) + ": expected key = value");
    const std::string key = trim(s.substr(0, eq)), value = trim(s.substr(eq + 1));
    switch (section) {
      case Section::None:
        fail(ErrorKind::InvalidArgument, "line " + std::to_string(line) + ": key outside a section");
      case Section::Experiment:
        apply_experiment_key(cfg, key, value, line);
        break;
      case Section::Scenario:
        apply_scenario_key(cfg.scenarios.back().config, key, value, line);
        break;
    }
  }
  if (cfg.scenarios.empty()) fail(ErrorKind::InvalidArgument, "experiment defines no scenarios");
  if (cfg.methods.empty()) fail(ErrorKind::InvalidArgument, "experiment lists no methods");
  if (cfg.seeds.empty()) fail(ErrorKind::InvalidArgument, "experiment lists no seeds");
  cfg.pretrain.validate();
  cfg.finetune.validate();
  for (const auto& sc : cfg.scenarios) sc.config.validate();
  return cfg;
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::IoError, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_experiment_config(ss.str());
}

std::string experiment_config_json(const ExperimentConfig& cfg) {
  nlohmann::ordered_json j;
  auto methods = nlohmann::ordered_json::array();
  for (Method m : cfg.methods) methods.push_back(to_string(m));
  j["methods"] = methods;
  j["seeds"] = cfg.seeds;
  j["budget"] = cfg.budget;
  j["encoder_dim"] = cfg.encoder_dim;
  j["mn_top"] = cfg.mn_top;
  j["threads"] = cfg.threads;
  auto train = [](const TrainConfig& t) {
    return nlohmann::ordered_json{{"learning_rate", t.learning_rate}, {"epochs", t.epochs},
                                  {"batch_size", t.batch_size},       {"l2_penalty", t.l2_penalty},
                                  {"early_stop_patience", t.early_stop_patience}};
  };
  j["pretrain"] = train(cfg.pretrain);
  j["finetune"] = train(cfg.finetune);
  auto scenarios = nlohmann::ordered_json::array();
  for (const auto& sc : cfg.scenarios) {
    const auto& c = sc.config;
    nlohmann::ordered_json s{{"name", sc.name},
                             {"kind", to_string(c.kind)},
                             {"k_source", c.k_source},
                             {"k_target", c.k_target},
                             {"overlap", c.overlap},
                             {"separation", c.separation},
                             {"dim", c.dim},
                             {"stddev", c.stddev},
                             {"per_class_source", c.per_class_source},
                             {"per_class_target_train", c.per_class_target_train},
                             {"per_class_target_test", c.per_class_target_test}};
    s["near"] = c.near ? nlohmann::ordered_json(*c.near) : nlohmann::ordered_json();
    scenarios.push_back(std::move(s));
  }
  j["scenarios"] = scenarios;
  return j.dump(2);
}

ExperimentResult run_experiment(const ExperimentConfig& config) {
  const std::size_t n_methods = config.methods.size(), n_seeds = config.seeds.size();
  const std::size_t cells = config.scenarios.size() * n_methods * n_seeds;
  ExperimentResult result;
  result.rows.resize(cells);

  auto run_cell = [&](std::size_t idx) {
    const auto& sc = config.scenarios[idx / (n_methods * n_seeds)];
    const Method method = config.methods[(idx / n_seeds) % n_methods];
    const std::uint64_t seed = config.seeds[idx % n_seeds];
    ExperimentRow row{sc.name, to_string(method), seed, 0.0, 0.0, 0, "ok"};
    try {
      ScenarioConfig scfg = sc.config;
      scfg.seed = seed;
      const Scenario data = make_scenario(scfg);
      PipelineConfig pc;
      pc.method = method;
      pc.budget = config.budget;
      pc.encoder_dim = config.encoder_dim;
      pc.mn_top = config.mn_top;
      pc.seed = seed;
      pc.pretrain = config.pretrain;
      pc.finetune = config.finetune;
      pc.pretrain.seed = pc.finetune.seed = seed;
      const PipelineResult r = run_pipeline(data.source, data.target_train, data.target_test, pc);
      row.accuracy = 1.0 - r.target_eval.zero_one_error;
      row.w1_objective = r.w1_objective;
      row.support_size = r.support_size;
    } catch (const std::exception& e) {
      row.status = std::string("error: ") + e.what();
    }
    result.rows[idx] = std::move(row);
  };

  std::size_t threads = config.threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : config.threads;
  threads = std::min(threads, std::max<std::size_t>(cells, 1));
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < cells; i = next++) run_cell(i);
  };
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  for (std::size_t s = 0; s < config.scenarios.size(); ++s)
    for (std::size_t m = 0; m < n_methods; ++m) {
      ExperimentSummary sum;
      sum.scenario = config.scenarios[s].name;
      sum.method = to_string(config.methods[m]);
      sum.runs = n_seeds;
      std::vector<double> acc;
      for (std::size_t k = 0; k < n_seeds; ++k) {
        const auto& row = result.rows[(s * n_methods + m) * n_seeds + k];
        if (row.status != "ok") continue;
        acc.push_back(row.accuracy);
        sum.mean_w1 += row.w1_objective;
        sum.mean_support += static_cast<double>(row.support_size);
      }
      sum.runs_ok = acc.size();
      if (!acc.empty()) {
        for (double a : acc) sum.mean_accuracy += a;
        sum.mean_accuracy /= static_cast<double>(acc.size());
        sum.mean_w1 /= static_cast<double>(acc.size());
        sum.mean_support /= static_cast<double>(acc.size());
        if (acc.size() > 1) {
          double ss = 0.0;
          for (double a : acc) ss += (a - sum.mean_accuracy) * (a - sum.mean_accuracy);
          sum.std_accuracy = std::sqrt(ss / static_cast<double>(acc.size() - 1));
        }
      }
      result.summary.push_back(std::move(sum));
    }
  return result;
}

std::string experiment_csv(const ExperimentResult& result) {
  std::ostringstream out;
  out << "scenario,method,seed,accuracy,accuracy_std,w1_objective,support_size,status\n";
  for (const auto& r : result.rows)
    out << csv_field(r.scenario) << ',' << r.method << ',' << r.seed << ',' << num(r.accuracy) << ",,"
        << num(r.w1_objective) << ',' << r.support_size << ',' << csv_field(r.status) << '\n';
  for (const auto& s : result.summary)
    out << csv_field(s.scenario) << ',' << s.method << ",summary," << num(s.mean_accuracy) << ','
        << num(s.std_accuracy) << ',' << num(s.mean_w1) << ',' << num(s.mean_support) << ",ok "
        << s.runs_ok << '/' << s.runs << '\n';
  return out.str();
}

}  // namespace wass
