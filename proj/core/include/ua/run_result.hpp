#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace ua {

struct TraceOptions {
  // Record the (slot, running sum-utility) series every `sample_every`
  // slots (frames x L for the frame algorithm); 0 picks ~1000 points.
  std::int64_t sample_every = 0;
  bool full_trace = false;

  std::int64_t effective_stride(std::int64_t horizon) const {
    if (sample_every > 0) return sample_every;
    return horizon <= 1000 ? 1 : horizon / 1000;
  }
};

// One simulated run. Sum utility is sum_i U_i(running average rate), with
// the running average cumulative from slot 0.
struct RunResult {
  std::vector<std::int64_t> slots;
  std::vector<double> sum_utility;
  std::vector<double> final_average_rates;

  struct TraceRow {
    std::int64_t slot;
    int state;
    std::vector<int> assoc;
    std::vector<double> rates;
    std::vector<int> q;
    std::vector<int> k;
  };
  std::vector<TraceRow> trace;

  // Fraction of slots spent in each labeled recurrent class, when a chain
  // labeling was supplied to the runner. Key -1 counts unlabeled slots.
  std::map<int, double> class_occupancy;
};

// CSV contract shared by all algorithms and the subgradient baseline:
// header "Slots,SumUtility", one row per sampled slot.
void write_run_csv(const RunResult& result, std::ostream& out);
void write_run_csv(const RunResult& result, const std::string& path);

// Full per-slot trace (one row per slot: slot, state, per-user assoc,
// rate, q, K).
void write_trace_csv(const RunResult& result, std::ostream& out);

// Pointwise mean of several runs sampled on a common slot grid.
RunResult mean_of_runs(const std::vector<RunResult>& runs);

}  // namespace ua
