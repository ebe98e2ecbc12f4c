#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "ua/model.hpp"
#include "ua/run_result.hpp"
#include "ua/rng.hpp"
#include "ua/utility.hpp"

namespace ua {

struct KnownStateParams {
  double epsilon = 0.1;  // in [0, 1)
  double z = 0.0;        // > number of users
  int history = 2;       // K: per-state history depth
  std::uint64_t seed = 1;
  double rate_tolerance = 0.0;

  void validate(int num_users) const;
};

// Known-state agent: per state s it remembers the actions taken and rates
// received on the last K occurrences of s (index 0 oldest), the occurrence
// counters t_s with sum_s t_s = t, and the mood q. The agent observes the
// state (that is the point of this variant) but never other users.
class Alg3Agent {
 public:
  Alg3Agent(int num_actions, int num_states, UtilityFn utility, const KnownStateParams& params,
            RngStream rng);

  // Box order within one slot: the state update comes first.
  void note_state(int state);
  int choose(int state);
  void observe(int state, int action, double rate);

  // Occupancy-weighted average payoff with the current slot's rate
  // replacing the oldest entry of the current state's buffer. Requires
  // note_state() to have been called for this slot already.
  double weighted_average_payoff(int state, double rate) const;

  int q() const { return q_; }
  std::int64_t count(int state) const { return counts_[state]; }
  std::int64_t total_count() const { return total_; }
  int action_at(int state, int j) const { return actions_[state][j]; }  // j = 0 oldest
  double rate_at(int state, int j) const { return rates_[state][j]; }

  // Test hooks: overwrite one state's history (oldest first), the
  // occupancy counters, or the mood.
  void reset_state_history(int state, std::span<const int> actions,
                           std::span<const double> rates);
  void set_counts(std::span<const std::int64_t> counts);
  void set_mood(int q) { q_ = q; }

 private:
  int num_actions_;
  int history_;
  UtilityFn utility_;
  double epsilon_;
  double explore_prob_;
  double log_epsilon_;
  double rate_tolerance_;
  RngStream rng_;
  std::vector<std::vector<int>> actions_;   // [state][j], j = 0 oldest
  std::vector<std::vector<double>> rates_;  // [state][j]
  std::vector<double> rate_sums_;           // per-state sum of the K buffer entries
  std::vector<std::int64_t> counts_;
  std::int64_t total_ = 0;
  int q_ = 0;
};

// Runs the known-state dynamics for `horizon` slots on an exogenous
// ergodic chain (an action-independent iid pmf is accepted as the
// degenerate case). If `action_histogram` is given it accumulates
// [state][joint action] visit counts.
RunResult run_alg3(const NetworkModel& model, const UtilityProfile& utility,
                   const KnownStateParams& params, std::int64_t horizon,
                   const TraceOptions& opts = {}, int initial_state = 0,
                   std::vector<std::vector<std::int64_t>>* action_histogram = nullptr);

}  // namespace ua
