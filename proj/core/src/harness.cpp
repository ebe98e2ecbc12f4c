#include "ua/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <future>
#include <thread>

#include <json.hpp>

#include "ua/alg1.hpp"
#include "ua/errors.hpp"
#include "ua/frame.hpp"
#include "ua/known_state.hpp"
#include "ua/markov.hpp"
#include "ua/subgradient.hpp"

namespace ua {

namespace {

using nlohmann::json;

std::string format_eps(double eps) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g", eps);
  return buf;
}

FrameParams frame_params_for(const ExperimentSpec& spec, const Scenario& scenario, double eps,
                             std::uint64_t seed) {
  FrameParams params;
  params.epsilon = eps;
  params.z = spec.effective_z(scenario.model.num_users());
  params.history = spec.kmax;
  params.seed = seed;
  if (spec.frame_len > 0 && spec.delta > 0.0) {
    params.frame_len = spec.frame_len;
    params.delta = spec.delta;
    return params;
  }
  FrameParamChoice choice;
  if (spec.algorithm == "alg2-markov") {
    // Bound the SLEM over the finite control set.
    double lambda = 0.0;
    for (const auto& h : enumerate_controls(scenario.model)) {
      lambda = std::max(lambda, slem(induced_kernel(scenario.model, h)));
    }
    choice = choose_frame_params_markov(eps, params.z, std::min(lambda, 0.999999));
  } else {
    choice = choose_frame_params_iid(eps, params.z);
  }
  params.frame_len = spec.frame_len > 0 ? spec.frame_len : choice.frame_len;
  params.delta = spec.delta > 0.0 ? spec.delta : choice.delta;
  return params;
}

RunResult run_one(const ExperimentSpec& spec, const Scenario& scenario, double eps,
                  std::uint64_t seed) {
  TraceOptions opts;
  opts.sample_every = spec.sample_every;
  opts.full_trace = spec.full_trace;
  if (spec.algorithm == "alg1") {
    Alg1Params params;
    params.epsilon = eps;
    params.z = spec.effective_z(scenario.model.num_users());
    params.k_max = spec.kmax;
    params.seed = seed;
    return run_alg1(scenario.model, scenario.utility, params, spec.horizon, opts);
  }
  if (spec.algorithm == "alg2-iid" || spec.algorithm == "alg2-markov") {
    const FrameParams params = frame_params_for(spec, scenario, eps, seed);
    const FrameVariant variant = spec.algorithm == "alg2-iid" ? FrameVariant::kIidAction
                                                              : FrameVariant::kMarkovControl;
    return run_frame(scenario.model, scenario.utility, params, variant, spec.horizon, opts);
  }
  if (spec.algorithm == "alg3") {
    KnownStateParams params;
    params.epsilon = eps;
    params.z = spec.effective_z(scenario.model.num_users());
    params.history = spec.kmax;
    params.seed = seed;
    return run_alg3(scenario.model, scenario.utility, params, spec.horizon, opts);
  }
  throw std::invalid_argument("unknown algorithm: " + spec.algorithm);
}

}  // namespace

SweepResult run_experiment(const ExperimentSpec& spec, const Scenario& scenario) {
  if (spec.eps_list.empty()) throw std::invalid_argument("epsilon grid must be nonempty");
  if (spec.replications < 1) throw std::invalid_argument("need at least one replication");
  if (spec.horizon < 1) throw std::invalid_argument("horizon must be positive");

  struct Job {
    std::size_t eps_index;
    int replication;
  };
  std::vector<Job> jobs;
  for (std::size_t e = 0; e < spec.eps_list.size(); ++e) {
    for (int r = 0; r < spec.replications; ++r) jobs.push_back({e, r});
  }
  std::vector<RunResult> results(jobs.size());

  const auto run_job = [&](std::size_t j) {
    const auto [e, r] = jobs[j];
    const std::uint64_t seed =
        mix_seed(spec.seed, kStreamReplication,
                 (static_cast<std::uint64_t>(r) << 20) | static_cast<std::uint64_t>(e));
    results[j] = run_one(spec, scenario, spec.eps_list[e], seed);
  };

  int threads = spec.threads > 0 ? spec.threads
                                 : static_cast<int>(std::thread::hardware_concurrency());
  threads = std::max(1, std::min<int>(threads, static_cast<int>(jobs.size())));
  if (threads == 1) {
    for (std::size_t j = 0; j < jobs.size(); ++j) run_job(j);
  } else {
    std::vector<std::future<void>> workers;
    std::atomic<std::size_t> cursor{0};
    for (int w = 0; w < threads; ++w) {
      workers.push_back(std::async(std::launch::async, [&]() {
        for (;;) {
          const std::size_t j = cursor.fetch_add(1);
          if (j >= jobs.size()) return;
          run_job(j);
        }
      }));
    }
    for (auto& w : workers) w.get();
  }

  SweepResult sweep;
  sweep.eps_list = spec.eps_list;
  const bool write = !spec.out_dir.empty();
  if (write) std::filesystem::create_directories(spec.out_dir);
  for (std::size_t j = 0; j < jobs.size(); ++j) {
    SweepCell cell;
    cell.eps = spec.eps_list[jobs[j].eps_index];
    cell.replication = jobs[j].replication;
    cell.run = std::move(results[j]);
    if (write) {
      cell.csv_path = spec.out_dir + "/" + spec.algorithm + "_eps" + format_eps(cell.eps) +
                      "_rep" + std::to_string(cell.replication) + ".csv";
      write_run_csv(cell.run, cell.csv_path);
    }
    sweep.cells.push_back(std::move(cell));
  }
  for (std::size_t e = 0; e < spec.eps_list.size(); ++e) {
    std::vector<RunResult> runs;
    for (const auto& cell : sweep.cells) {
      if (cell.eps == spec.eps_list[e]) runs.push_back(cell.run);
    }
    RunResult mean = mean_of_runs(runs);
    if (write) {
      const std::string path = spec.out_dir + "/" + spec.algorithm + "_eps" +
                               format_eps(spec.eps_list[e]) + "_mean.csv";
      write_run_csv(mean, path);
      sweep.mean_csv_path[spec.eps_list[e]] = path;
    }
    sweep.mean_by_eps[spec.eps_list[e]] = std::move(mean);
  }
  return sweep;
}

double final_window_mean(const RunResult& run) {
  if (run.slots.empty()) throw std::invalid_argument("empty run");
  const std::int64_t horizon = run.slots.back();
  const std::int64_t cutoff = horizon - horizon / 5;
  double sum = 0.0;
  int count = 0;
  for (std::size_t i = 0; i < run.slots.size(); ++i) {
    if (run.slots[i] > cutoff) {
      sum += run.sum_utility[i];
      ++count;
    }
  }
  if (count == 0) return run.sum_utility.back();
  return sum / count;
}

CompareReport compare_runs(const ExperimentSpec& spec, const Scenario& scenario,
                           const SweepResult& sweep, int oracle_grid_k) {
  CompareReport report;
  report.algorithm = spec.algorithm;
  report.oracle_grid = oracle_grid_k > 0 ? oracle_grid_k : spec.kmax;

  ProgramVariant variant;
  if (spec.algorithm == "alg1") {
    variant = ProgramVariant::kCycles;
  } else if (spec.algorithm == "alg2-iid") {
    variant = ProgramVariant::kIidAction;
  } else if (spec.algorithm == "alg2-markov") {
    variant = ProgramVariant::kControls;
  } else {
    variant = ProgramVariant::kPerState;
  }

  if (variant == ProgramVariant::kCycles) {
    // The replay dynamics stabilize on windows of at most K_max slots, so
    // the matching certified optimum is the best single cycle of length
    // <= K_max.
    CycleEnumerationOptions opts;
    opts.max_length = spec.kmax;
    const auto cycles = enumerate_basic_cycles(scenario.model, opts);
    report.oracle_value =
        solve_cycle_program(scenario.model, scenario.utility, cycles, 1).sum_utility;
  } else {
    report.oracle_value =
        exhaustive_optimum(scenario.model, scenario.utility, variant, report.oracle_grid)
            .sum_utility;
  }
  SubgradientConfig sg;
  sg.iterations = 1500;
  sg.multistarts = 4;
  report.baseline_value =
      subgradient_baseline(scenario.model, scenario.utility, variant, sg).best_value;

  for (const double eps : sweep.eps_list) {
    std::vector<double> finals;
    for (const auto& cell : sweep.cells) {
      if (cell.eps == eps) finals.push_back(final_window_mean(cell.run));
    }
    CompareRow row;
    row.eps = eps;
    for (const double f : finals) row.final_mean += f;
    row.final_mean /= static_cast<double>(finals.size());
    if (finals.size() > 1) {
      double var = 0.0;
      for (const double f : finals) var += (f - row.final_mean) * (f - row.final_mean);
      var /= static_cast<double>(finals.size() - 1);
      row.final_stderr = std::sqrt(var / static_cast<double>(finals.size()));
    }
    row.oracle = report.oracle_value;
    row.gap = report.oracle_value - row.final_mean;
    report.rows.push_back(row);
  }
  std::sort(report.rows.begin(), report.rows.end(),
            [](const CompareRow& a, const CompareRow& b) { return a.eps < b.eps; });

  // Monotonicity verdict: sum utility should not increase with eps; one
  // inversion is tolerated if it stays within one combined standard error.
  report.inversions = 0;
  double worst_excess = 0.0;
  for (std::size_t i = 0; i + 1 < report.rows.size(); ++i) {
    const auto& lo = report.rows[i];
    const auto& hi = report.rows[i + 1];
    if (hi.final_mean > lo.final_mean) {
      ++report.inversions;
      const double se = std::sqrt(lo.final_stderr * lo.final_stderr +
                                  hi.final_stderr * hi.final_stderr);
      worst_excess = std::max(worst_excess, hi.final_mean - lo.final_mean - se);
    }
  }
  report.monotone_ok =
      report.inversions == 0 || (report.inversions == 1 && worst_excess <= 0.0);
  return report;
}

// ---------------------------------------------------------------------------
// JSON plumbing

ExperimentSpec experiment_from_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open experiment file: " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw std::runtime_error(path + ": " + e.what());
  }
  ExperimentSpec spec;
  if (j.contains("scenario")) spec.scenario_path = j.at("scenario").get<std::string>();
  if (j.contains("alg")) spec.algorithm = j.at("alg").get<std::string>();
  if (j.contains("eps")) spec.eps_list = j.at("eps").get<std::vector<double>>();
  if (j.contains("kmax")) spec.kmax = j.at("kmax").get<int>();
  if (j.contains("frame_len")) spec.frame_len = j.at("frame_len").get<int>();
  if (j.contains("delta")) spec.delta = j.at("delta").get<double>();
  if (j.contains("z")) spec.z = j.at("z").get<double>();
  if (j.contains("horizon")) spec.horizon = j.at("horizon").get<std::int64_t>();
  if (j.contains("reps")) spec.replications = j.at("reps").get<int>();
  if (j.contains("seed")) spec.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("out")) spec.out_dir = j.at("out").get<std::string>();
  if (j.contains("sample_every")) spec.sample_every = j.at("sample_every").get<std::int64_t>();
  if (j.contains("threads")) spec.threads = j.at("threads").get<int>();
  return spec;
}

std::string experiment_to_json(const ExperimentSpec& spec) {
  json j;
  j["scenario"] = spec.scenario_path;
  j["alg"] = spec.algorithm;
  j["eps"] = spec.eps_list;
  j["kmax"] = spec.kmax;
  if (spec.frame_len > 0) j["frame_len"] = spec.frame_len;
  if (spec.delta > 0.0) j["delta"] = spec.delta;
  if (spec.z > 0.0) j["z"] = spec.z;
  j["horizon"] = spec.horizon;
  j["reps"] = spec.replications;
  j["seed"] = spec.seed;
  if (!spec.out_dir.empty()) j["out"] = spec.out_dir;
  if (spec.sample_every > 0) j["sample_every"] = spec.sample_every;
  return j.dump(2);
}

std::string compare_report_json(const CompareReport& report) {
  json rows = json::array();
  for (const auto& row : report.rows) {
    rows.push_back({{"eps", row.eps},
                    {"final_mean", row.final_mean},
                    {"final_stderr", row.final_stderr},
                    {"oracle", row.oracle},
                    {"gap", row.gap}});
  }
  const json j{{"algorithm", report.algorithm},
               {"oracle_grid", report.oracle_grid},
               {"oracle_value", report.oracle_value},
               {"baseline_value", report.baseline_value},
               {"rows", rows},
               {"monotone_ok", report.monotone_ok},
               {"inversions", report.inversions}};
  return j.dump(2);
}

}  // namespace ua
