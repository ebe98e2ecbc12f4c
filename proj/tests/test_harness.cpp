#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "helpers.hpp"
#include "ua/harness.hpp"

namespace {

namespace fs = std::filesystem;

ua::Scenario small_scenario() {
  auto model = ua::test::det_model(
      2, 2, 2, [](int s, std::int64_t a, int i) {
        return 0.05 + 0.9 * ((ua::mix_seed(41, s * 4 + a, i) % 83) / 82.0);
      },
      [](int s, std::int64_t a) { return (s + static_cast<int>(a)) % 2; });
  return ua::Scenario{std::move(model), ua::default_log_utility(2)};
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

}  // namespace

TEST_CASE("sweep writes one CSV per cell plus a mean curve") {
  TempDir dir("ua_harness_sweep");
  ua::ExperimentSpec spec;
  spec.algorithm = "alg1";
  spec.eps_list = {0.3, 0.2, 0.1, 0.05};
  spec.kmax = 2;
  spec.horizon = 2000;
  spec.replications = 2;
  spec.seed = 5;
  spec.out_dir = dir.path.string();
  const auto scenario = small_scenario();
  const auto sweep = ua::run_experiment(spec, scenario);

  CHECK(sweep.cells.size() == 8);
  CHECK(sweep.mean_by_eps.size() == 4);
  int csvs = 0, means = 0;
  for (const auto& entry : fs::directory_iterator(dir.path)) {
    const auto name = entry.path().filename().string();
    if (name.find("_mean.csv") != std::string::npos) ++means;
    else if (name.find(".csv") != std::string::npos) ++csvs;
  }
  CHECK(csvs == 8);
  CHECK(means == 4);

  const std::string sample = slurp(sweep.cells.front().csv_path);
  CHECK(sample.rfind("Slots,SumUtility\n", 0) == 0);
}

TEST_CASE("the sweep is byte-identical across runs and thread counts") {
  TempDir d1("ua_harness_d1"), d2("ua_harness_d2"), d3("ua_harness_d3");
  ua::ExperimentSpec spec;
  spec.algorithm = "alg1";
  spec.eps_list = {0.2, 0.1};
  spec.horizon = 1500;
  spec.replications = 3;
  spec.seed = 9;
  const auto scenario = small_scenario();

  spec.out_dir = d1.path.string();
  spec.threads = 1;
  ua::run_experiment(spec, scenario);
  spec.out_dir = d2.path.string();
  spec.threads = 2;
  ua::run_experiment(spec, scenario);
  spec.out_dir = d3.path.string();
  spec.threads = 1;
  ua::run_experiment(spec, scenario);

  for (const auto& entry : fs::directory_iterator(d1.path)) {
    const auto name = entry.path().filename().string();
    CHECK(slurp((d1.path / name).string()) == slurp((d2.path / name).string()));
    CHECK(slurp((d1.path / name).string()) == slurp((d3.path / name).string()));
  }
}

TEST_CASE("replication streams are independent of execution order") {
  ua::ExperimentSpec spec;
  spec.algorithm = "alg3";
  spec.eps_list = {0.1};
  spec.horizon = 1000;
  spec.replications = 2;
  spec.seed = 11;
  auto model = ua::NetworkModel(1, 2, {{0, 1}}, 2, {0.6, 0.3, 0.2, 0.9},
                                ua::ExogenousEvolution{{{0.5, 0.5}, {0.5, 0.5}}});
  const ua::Scenario scenario{std::move(model), ua::default_log_utility(1)};
  const auto s1 = ua::run_experiment(spec, scenario);
  spec.replications = 5;  // more cells; the first two must not change
  const auto s2 = ua::run_experiment(spec, scenario);
  CHECK(s1.cells[0].run.sum_utility == s2.cells[0].run.sum_utility);
  CHECK(s1.cells[1].run.sum_utility == s2.cells[1].run.sum_utility);
}

TEST_CASE("compare report: gaps, monotonicity fields and schema") {
  ua::ExperimentSpec spec;
  spec.algorithm = "alg1";
  spec.eps_list = {0.3, 0.05};
  spec.kmax = 2;
  spec.horizon = 60000;
  spec.replications = 3;
  spec.seed = 13;
  const auto scenario = small_scenario();
  const auto sweep = ua::run_experiment(spec, scenario);
  const auto report = ua::compare_runs(spec, scenario, sweep);

  CHECK(report.algorithm == "alg1");
  CHECK(report.rows.size() == 2);
  CHECK(report.rows[0].eps == 0.05);
  for (const auto& row : report.rows) {
    CHECK(row.oracle == report.oracle_value);
    CHECK(row.gap >= 0.0);  // the certified optimum bounds every run
    CHECK(row.gap == doctest::Approx(report.oracle_value - row.final_mean));
  }

  const auto parsed = nlohmann::json::parse(ua::compare_report_json(report));
  for (const auto* key : {"algorithm", "oracle_grid", "oracle_value", "baseline_value",
                          "rows", "monotone_ok", "inversions"}) {
    CHECK(parsed.contains(key));
  }
  for (const auto* key : {"eps", "final_mean", "final_stderr", "oracle", "gap"}) {
    CHECK(parsed["rows"][0].contains(key));
  }
}

TEST_CASE("final window statistic uses the last fifth of the horizon") {
  ua::RunResult run;
  for (int t = 1; t <= 100; ++t) {
    run.slots.push_back(t);
    run.sum_utility.push_back(t <= 80 ? 0.0 : 1.0);
  }
  CHECK(ua::final_window_mean(run) == doctest::Approx(1.0));
}

TEST_CASE("experiment JSON round-trip") {
  ua::ExperimentSpec spec;
  spec.scenario_path = "scenario.json";
  spec.algorithm = "alg2-iid";
  spec.eps_list = {0.3, 0.1};
  spec.kmax = 2;
  spec.frame_len = 4000;
  spec.delta = 0.05;
  spec.horizon = 2000;
  spec.replications = 10;
  spec.seed = 99;
  spec.out_dir = "out";

  TempDir dir("ua_harness_json");
  const auto path = (dir.path / "exp.json").string();
  std::ofstream(path) << ua::experiment_to_json(spec);
  const auto back = ua::experiment_from_json_file(path);
  CHECK(back.scenario_path == spec.scenario_path);
  CHECK(back.algorithm == spec.algorithm);
  CHECK(back.eps_list == spec.eps_list);
  CHECK(back.kmax == spec.kmax);
  CHECK(back.frame_len == spec.frame_len);
  CHECK(back.delta == spec.delta);
  CHECK(back.horizon == spec.horizon);
  CHECK(back.replications == spec.replications);
  CHECK(back.seed == spec.seed);
  CHECK(back.out_dir == spec.out_dir);
}
