#include "test_util.hpp"

#include "wass/experiment.hpp"

#include <sstream>

using namespace wass;
using wass::testing::error_kind_of;

namespace {

const char* kSmall = R"(
# small matrix
[experiment]
methods = wass, all
seeds = 0-2
encoder_dim = 0
epochs = 30
finetune_epochs = 30

[scenario tiny]
kind = dda
k_source = 3
k_target = 2
dim = 3
per_class_source = 10
per_class_target_train = 5
per_class_target_test = 10 ; trailing comment
)";

std::size_t count_lines(const std::string& s) {
  std::size_t n = 0;
  for (char c : s) n += c == '\n' ? 1 : 0;
  return n;
}

}  // namespace

TEST_CASE("config parsing") {
  ExperimentConfig c = parse_experiment_config(kSmall);
  CHECK(c.methods == std::vector<Method>{Method::Wass, Method::All});
  CHECK(c.seeds == std::vector<std::uint64_t>{0, 1, 2});
  CHECK(c.encoder_dim == 0);
  CHECK(c.pretrain.epochs == 30);
  REQUIRE(c.scenarios.size() == 1);
  CHECK(c.scenarios[0].name == "tiny");
  CHECK(c.scenarios[0].config.per_class_target_test == 10);
  CHECK(error_kind_of([] { parse_experiment_config("[experiment]\nbogus = 1\n[scenario a]\n"); }) ==
        ErrorKind::InvalidArgument);
  CHECK(error_kind_of([] { parse_experiment_config("[experiment]\nseeds = 0\n"); }) == ErrorKind::InvalidArgument);
}

TEST_CASE("row counting and determinism") {
  ExperimentConfig c = parse_experiment_config(kSmall);
  ExperimentResult r = run_experiment(c);
  CHECK(r.rows.size() == 6);
  CHECK(r.summary.size() == 2);
  for (const auto& row : r.rows) CHECK(row.status == "ok");
  CHECK(r.rows[0].method == "wass");
  CHECK(r.rows[3].method == "all");
  CHECK(r.rows[1].seed == 1);
  const std::string csv = experiment_csv(r);
  CHECK(count_lines(csv) == 1 + 6 + 2);
  CHECK(csv.rfind("scenario,method,seed,accuracy,accuracy_std,w1_objective,support_size,status\n", 0) == 0);
  c.threads = 1;
  CHECK(experiment_csv(run_experiment(c)) == csv);
  c.threads = 3;
  CHECK(experiment_csv(run_experiment(c)) == csv);
}

TEST_CASE("failed cells are recorded and the run continues") {
  ExperimentConfig c = parse_experiment_config(kSmall);
  c.scenarios.push_back({"broken", c.scenarios[0].config});
  c.scenarios.back().config.overlap = 1;  // invalid for dda
  ExperimentResult r = run_experiment(c);
  CHECK(r.rows.size() == 12);
  std::size_t failed = 0;
  for (const auto& row : r.rows) failed += row.status.rfind("error", 0) == 0 ? 1 : 0;
  CHECK(failed == 6);
  CHECK(r.summary[2].runs_ok == 0);
}
