#include "ua/run_result.hpp"

#include <fstream>
#include <ostream>
#include <stdexcept>

#include "ua/errors.hpp"

namespace ua {

void write_run_csv(const RunResult& result, std::ostream& out) {
  out << "Slots,SumUtility\n";
  char buf[64];
  for (std::size_t i = 0; i < result.slots.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%lld,%.12g\n",
                  static_cast<long long>(result.slots[i]), result.sum_utility[i]);
    out << buf;
  }
}

void write_run_csv(const RunResult& result, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write CSV file: " + path);
  write_run_csv(result, out);
}

void write_trace_csv(const RunResult& result, std::ostream& out) {
  if (result.trace.empty()) return;
  const std::size_t n = result.trace.front().assoc.size();
  out << "slot,state";
  for (std::size_t i = 0; i < n; ++i) out << ",a" << i;
  for (std::size_t i = 0; i < n; ++i) out << ",r" << i;
  for (std::size_t i = 0; i < n; ++i) out << ",q" << i;
  for (std::size_t i = 0; i < n; ++i) out << ",K" << i;
  out << "\n";
  for (const auto& row : result.trace) {
    out << row.slot << "," << row.state;
    for (const int a : row.assoc) out << "," << a;
    for (const double r : row.rates) out << "," << r;
    for (const int q : row.q) out << "," << q;
    for (const int k : row.k) out << "," << k;
    out << "\n";
  }
}

RunResult mean_of_runs(const std::vector<RunResult>& runs) {
  if (runs.empty()) throw std::invalid_argument("mean_of_runs: no runs");
  RunResult mean;
  mean.slots = runs.front().slots;
  mean.sum_utility.assign(mean.slots.size(), 0.0);
  mean.final_average_rates.assign(runs.front().final_average_rates.size(), 0.0);
  for (const auto& run : runs) {
    if (run.slots != mean.slots) {
      throw InternalError("mean_of_runs: runs sampled on different slot grids");
    }
    for (std::size_t i = 0; i < run.sum_utility.size(); ++i) {
      mean.sum_utility[i] += run.sum_utility[i];
    }
    for (std::size_t i = 0; i < run.final_average_rates.size(); ++i) {
      mean.final_average_rates[i] += run.final_average_rates[i];
    }
  }
  const double inv = 1.0 / static_cast<double>(runs.size());
  for (double& v : mean.sum_utility) v *= inv;
  for (double& v : mean.final_average_rates) v *= inv;
  return mean;
}

}  // namespace ua
