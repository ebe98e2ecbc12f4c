#pragma once

#include <cstdint>
#include <vector>

#include "ua/cycles.hpp"
#include "ua/markov.hpp"
#include "ua/model.hpp"
#include "ua/utility.hpp"

namespace ua {

// Solution of one of the finite utility-maximization programs. `weights`
// indexes the program's columns (cycles, joint actions, or controls);
// the per-state program fills `per_state[state][action]` instead.
struct ProgramSolution {
  std::vector<double> weights;
  std::vector<std::vector<double>> per_state;
  std::vector<double> rates;
  double sum_utility = 0.0;
  double certificate_gap = 0.0;  // continuous mode only
};

inline constexpr std::int64_t kDefaultGridGuard = 20'000'000;

// Exact maximizer of sum_i U_i(r_i) over sub-convex cycle mixtures with
// weights in {0, 1/K, ..., 1} summing to at most 1. Throws GuardError with
// a grid-coarsening hint when the grid is too large to enumerate.
ProgramSolution solve_cycle_program(const NetworkModel& model, const UtilityProfile& utility,
                                    const std::vector<ConfigurationCycle>& cycles, int grid_k,
                                    std::int64_t guard = kDefaultGridGuard);

// Continuous relaxation solved approximately by multi-start projected
// gradient ascent; certificate_gap is the final Frank-Wolfe gap (an upper
// bound on the suboptimality for concave utilities).
ProgramSolution solve_cycle_program_continuous(const NetworkModel& model,
                                               const UtilityProfile& utility,
                                               const std::vector<ConfigurationCycle>& cycles,
                                               int iterations = 4000, int multistarts = 8,
                                               std::uint64_t seed = 1);

// Exact maximizer over action distributions p(a) in the 1/K grid summing
// to one, with rates E_{mu(.|a)} r(s, a). Iid evolution only.
ProgramSolution solve_action_grid_program(const NetworkModel& model,
                                          const UtilityProfile& utility, int grid_k,
                                          std::int64_t guard = kDefaultGridGuard);

// Exact maximizer over per-state action distributions p(a, s), each on the
// 1/K grid and summing to one per state, weighted by the exogenous
// time-average state distribution.
ProgramSolution solve_state_grid_program(const NetworkModel& model,
                                         const UtilityProfile& utility, int grid_k,
                                         std::int64_t guard = kDefaultGridGuard);

// Exact maximizer over mixtures p(h) of stationary controls on the 1/K
// grid; rates from expected_payoff_control. Controlled Markov evolution.
ProgramSolution solve_control_grid_program(const NetworkModel& model,
                                           const UtilityProfile& utility, int grid_k,
                                           std::int64_t guard = kDefaultGridGuard,
                                           std::int64_t max_controls = 200'000);

}  // namespace ua
