#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ua/run_result.hpp"
#include "ua/scenario.hpp"

namespace ua {

// One ε/K/L sweep over seeded replications of a single algorithm.
// Horizon counts slots for alg1/alg3 and frames for alg2-*.
struct ExperimentSpec {
  std::string scenario_path;
  std::string algorithm = "alg1";  // alg1 | alg2-iid | alg2-markov | alg3
  std::vector<double> eps_list = {0.1};
  int kmax = 2;            // K_max for alg1, history depth K otherwise
  int frame_len = 0;       // alg2 only; 0 derives L from epsilon
  double delta = 0.0;      // alg2 only; 0 derives delta from epsilon
  double z = 0.0;          // 0 picks num_users + 1
  std::int64_t horizon = 100'000;
  int replications = 1;
  std::uint64_t seed = 1;
  std::string out_dir;     // empty: keep results in memory only
  std::int64_t sample_every = 0;
  int threads = 0;         // 0 = hardware concurrency
  bool full_trace = false;

  double effective_z(int num_users) const {
    return z > 0.0 ? z : static_cast<double>(num_users) + 1.0;
  }
};

ExperimentSpec experiment_from_json_file(const std::string& path);
std::string experiment_to_json(const ExperimentSpec& spec);

struct SweepCell {
  double eps = 0.0;
  int replication = 0;
  RunResult run;
  std::string csv_path;  // empty when nothing was written
};

struct SweepResult {
  std::vector<SweepCell> cells;                // ordered by (eps index, replication)
  std::vector<double> eps_list;
  std::map<double, RunResult> mean_by_eps;
  std::map<double, std::string> mean_csv_path;
};

// Runs the sweep. (spec, seed) fully determines every output byte;
// replication streams are derived from (seed, replication, eps index) so
// cells can execute concurrently in any order.
SweepResult run_experiment(const ExperimentSpec& spec, const Scenario& scenario);

// Final-window statistic: mean sum utility over the sampled points in the
// last 20% of the horizon (the first 80% counts as warm-up).
double final_window_mean(const RunResult& run);

struct CompareRow {
  double eps = 0.0;
  double final_mean = 0.0;    // mean of per-replication final-window means
  double final_stderr = 0.0;  // standard error over replications
  double oracle = 0.0;
  double gap = 0.0;           // oracle - final_mean
};

struct CompareReport {
  std::string algorithm;
  int oracle_grid = 0;
  double oracle_value = 0.0;
  double baseline_value = 0.0;  // subgradient reference
  std::vector<CompareRow> rows;  // ascending eps
  bool monotone_ok = false;      // non-increasing in eps up to one 1-SE inversion
  int inversions = 0;
};

// Joins sweep output with the grid oracle that matches the algorithm
// (cycles restricted to length <= K_max for alg1; the Theorem-style grids
// otherwise) and the subgradient baseline.
CompareReport compare_runs(const ExperimentSpec& spec, const Scenario& scenario,
                           const SweepResult& sweep, int oracle_grid_k = 0);

std::string compare_report_json(const CompareReport& report);

}  // namespace ua
