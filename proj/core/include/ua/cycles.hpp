#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "ua/model.hpp"
#include "ua/utility.hpp"

namespace ua {

// A cyclically consistent configuration sequence under the deterministic
// transition map: state[j+1] = g(state[j], action[j]) and the last entry
// wraps to the first. Basic cycles have pairwise distinct configurations.
struct ConfigurationCycle {
  std::vector<int> states;
  std::vector<std::int64_t> actions;

  int length() const { return static_cast<int>(states.size()); }
};

// True iff the sequence is consistent with g and wraps around.
bool cycle_is_consistent(const NetworkModel& model, const ConfigurationCycle& cycle);

struct CycleEnumerationOptions {
  // Longest cycle to emit; 0 means the |S x A| upper bound for basic cycles.
  int max_length = 0;
  // Enumeration guards. Node guard bounds |S x A|; the cycle guard aborts
  // pathologically dense instances.
  std::int64_t max_nodes = 4096;
  std::int64_t max_cycles = 5'000'000;
};

// All basic configuration cycles, each in its canonical rotation (the one
// starting at the smallest (state, action) node). Complete and free of
// rotational duplicates.
std::vector<ConfigurationCycle> enumerate_basic_cycles(const NetworkModel& model,
                                                       CycleEnumerationOptions opts = {});

// Per-user mean rate along the cycle.
std::vector<double> cycle_rate(const NetworkModel& model, const ConfigurationCycle& cycle);

std::vector<std::vector<double>> cycle_rates(const NetworkModel& model,
                                             const std::vector<ConfigurationCycle>& cycles);

struct HullMembership {
  bool member = false;
  std::vector<double> weights;  // over the cycle-rate columns when member
};

// Is `point` dominated by a sub-convex combination (weights >= 0 summing to
// at most 1) of the given rate vectors, within `tol` per coordinate?
HullMembership hull_membership(std::span<const double> point,
                               const std::vector<std::vector<double>>& rate_vectors,
                               double tol = 1e-9);

}  // namespace ua
