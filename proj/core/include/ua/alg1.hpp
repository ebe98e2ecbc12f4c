#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "ua/model.hpp"
#include "ua/run_result.hpp"
#include "ua/rng.hpp"
#include "ua/utility.hpp"

namespace ua {

struct Alg1Params {
  double epsilon = 0.1;  // exploration scale, in [0, 1); 0 gives the unperturbed dynamics
  double z = 0.0;        // exploration exponent, must exceed the number of users
  int k_max = 2;         // largest averaging window
  std::uint64_t seed = 1;
  // Rates are table entries here, so the repeat test uses exact equality
  // unless a tolerance is set.
  double rate_tolerance = 0.0;

  void validate(int num_users) const;
};

// One completely uncoupled agent. Its entire visible world is: its own
// action set (as positions 0..|A_i|-1), its own utility, the last k_max
// (action, rate) pairs, the satisfaction bit q and the window size K.
// Nothing here can reach the model, the system state or other agents.
class Alg1Agent {
 public:
  Alg1Agent(int num_actions, UtilityFn utility, const Alg1Params& params, RngStream rng);

  // Association decision for the upcoming slot.
  int choose_action();

  // End-of-slot update with the realized (action, rate) of this agent.
  void observe(int action, double rate);

  int q() const { return q_; }
  int window() const { return k_; }
  int action_ago(int j) const;     // j in {1, .., k_max}
  double rate_ago(int j) const;

  // Overwrite the bounded history (oldest first), window and mood; used to
  // start a run from an analyzer state.
  void reset_history(std::span<const int> actions, std::span<const double> rates, int k, int q);

 private:
  int num_actions_;
  UtilityFn utility_;
  double epsilon_;
  double explore_prob_;  // epsilon^z
  double log_epsilon_;
  int k_max_;
  double rate_tolerance_;
  RngStream rng_;
  std::vector<int> past_actions_;  // ring buffers, index head_ is the next write slot
  std::vector<double> past_rates_;
  int head_ = 0;
  int k_ = 1;
  int q_ = 0;
};

// Snapshot of the joint process: the last k_max configurations (oldest
// first) plus every user's window size and mood.
struct Alg1Snapshot {
  std::vector<int> states;
  std::vector<std::int64_t> actions;
  std::vector<int> k;
  std::vector<int> q;
};

using SnapshotLabeler = std::function<int(const Alg1Snapshot&)>;

// Slot-synchronous simulation of the deterministic-evolution dynamics.
// The runner owns the environment bookkeeping (state, rates, trace); all
// decision logic lives in the uncoupled agents.
class Alg1Runner {
 public:
  Alg1Runner(const NetworkModel& model, const UtilityProfile& utility, const Alg1Params& params,
             int initial_state = 0);

  // One slot: choose actions, realize rates, update moods and the state.
  void step();

  // Runs `horizon` further slots, collecting the sum-utility series.
  // Statistics are cumulative from the runner's last construction or
  // injection point.
  RunResult run(std::int64_t horizon, const TraceOptions& opts = {},
                const SnapshotLabeler& labeler = nullptr);

  // Restart from an analyzer state: agents' histories, K and q are set
  // from the snapshot and the system state becomes g(last configuration).
  void inject(const Alg1Snapshot& snapshot);

  // Valid after inject() or once at least k_max slots have been stepped.
  Alg1Snapshot snapshot() const;

  int upcoming_state() const { return next_state_; }
  std::int64_t slot() const { return slot_; }

 private:
  void reset_statistics();

  const NetworkModel* model_;
  const UtilityProfile* utility_;
  Alg1Params params_;
  std::vector<Alg1Agent> agents_;
  std::vector<std::int64_t> strides_;
  // Last k_max configurations, oldest first.
  std::vector<int> window_states_;
  std::vector<std::int64_t> window_actions_;
  int next_state_;
  std::int64_t slot_ = 0;
  std::vector<double> cumulative_rates_;
  std::vector<int> last_assoc_positions_;
};

// Convenience wrapper: fresh runner, bootstrap start, `horizon` slots.
RunResult run_alg1(const NetworkModel& model, const UtilityProfile& utility,
                   const Alg1Params& params, std::int64_t horizon, const TraceOptions& opts = {},
                   int initial_state = 0);

}  // namespace ua
