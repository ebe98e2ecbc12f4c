#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ua/cycles.hpp"
#include "ua/model.hpp"
#include "ua/programs.hpp"
#include "ua/utility.hpp"

namespace ua {

enum class ProgramVariant { kCycles, kIidAction, kPerState, kControls };

ProgramVariant program_variant_from_string(const std::string& name);
std::string to_string(ProgramVariant variant);

struct SubgradientConfig {
  enum class StepRule { kConstant, kDiminishing };
  StepRule step_rule = StepRule::kDiminishing;
  double step_size = 0.5;
  int iterations = 2000;
  int multistarts = 1;
  std::uint64_t seed = 1;
  // Per-block feasible set: the cycles variant uses sum p <= 1,
  // everything else a plain probability simplex per block.
};

struct BaselineResult {
  std::vector<double> best_point;   // concatenated block weights
  std::vector<double> best_rates;
  double best_value = 0.0;
  // Objective value at each iterate; entry 0 is the uniform starting
  // point. Written out as Slots,SumUtility with the iteration index as the
  // slot column.
  std::vector<double> trajectory;
};

// Projected subgradient ascent on sum_i U_i(r(p)) over the relaxed
// feasible set of the chosen formulation. The result is a baseline, not a
// certified optimum; concavity is not assumed.
BaselineResult subgradient_baseline(const NetworkModel& model, const UtilityProfile& utility,
                                    ProgramVariant variant, const SubgradientConfig& config);

// Lower-level entry point used by the tests: columns per block, with
// block b's weights confined to a simplex (or sub-simplex).
BaselineResult subgradient_over_columns(const std::vector<std::vector<std::vector<double>>>& blocks,
                                        const UtilityProfile& utility, bool sum_to_one,
                                        const SubgradientConfig& config);

// Certified grid optimum for the same formulation (delegates to the exact
// grid solvers).
ProgramSolution exhaustive_optimum(const NetworkModel& model, const UtilityProfile& utility,
                                   ProgramVariant variant, int grid_k,
                                   std::int64_t guard = kDefaultGridGuard);

}  // namespace ua
