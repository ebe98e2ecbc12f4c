#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "ua/rng.hpp"

namespace ua {

// A configuration is a (system state, joint association) pair. assoc[i] is
// the AP id user i is associated with.
struct Configuration {
  int state = 0;
  std::vector<int> assoc;

  bool operator==(const Configuration&) const = default;
};

// State evolution variants.
//
// Deterministic:    s' = next[s][a]           (users never observe s)
// IidPerAction:     s' ~ pmf[a]               (fresh draw every slot)
// ControlledMarkov: s' ~ kernel[s][a]         (users observe s before acting)
// ExogenousErgodic: s' ~ transition[s]        (action plays no role)
//
// All are indexed by the flattened joint-action index (see NetworkModel).
struct DeterministicEvolution {
  std::vector<std::vector<int>> next;  // [state][action] -> state
};
struct IidEvolution {
  std::vector<std::vector<double>> pmf;  // [action][state'] -> prob
};
struct ControlledMarkovEvolution {
  std::vector<std::vector<std::vector<double>>> kernel;  // [state][action][state']
};
struct ExogenousEvolution {
  std::vector<std::vector<double>> transition;  // [state][state']
};

using Evolution = std::variant<DeterministicEvolution, IidEvolution,
                               ControlledMarkovEvolution, ExogenousEvolution>;

// Finite user-association network: N users, M APs, per-user association
// sets, |S| states and a dense rate table f_i(s, a) in [0, 1].
//
// Immutable after construction; safe for concurrent reads.
class NetworkModel {
 public:
  // rate_table is dense, indexed by state, then flattened joint action
  // (row-major over users, user 0 most significant), then user.
  NetworkModel(int num_users, int num_aps, std::vector<std::vector<int>> assoc_sets,
               int num_states, std::vector<double> rate_table, Evolution evolution);

  int num_users() const { return num_users_; }
  int num_aps() const { return num_aps_; }
  int num_states() const { return num_states_; }
  const std::vector<std::vector<int>>& assoc_sets() const { return assoc_sets_; }
  const std::vector<int>& assoc_set(int user) const { return assoc_sets_[user]; }

  std::int64_t num_actions() const { return num_actions_; }
  int user_action_count(int user) const { return static_cast<int>(assoc_sets_[user].size()); }

  // Flattened index of a joint association (AP ids per user). Throws
  // std::invalid_argument naming the offending user if some assoc[i] is
  // not in A_i.
  std::int64_t action_index(std::span<const int> assoc) const;
  std::vector<int> assoc_from_index(std::int64_t action) const;

  // Position of AP `ap` inside user `user`'s association set, or -1.
  int action_position(int user, int ap) const;

  // Rates f(s, a) for all users; `rates_at` is the zero-copy accessor.
  std::vector<double> rate(const Configuration& c) const;
  std::span<const double> rates_at(int state, std::int64_t action) const {
    return {rate_table_.data() + (static_cast<std::int64_t>(state) * num_actions_ + action) *
                                     num_users_,
            static_cast<std::size_t>(num_users_)};
  }

  const Evolution& evolution() const { return evolution_; }
  bool is_deterministic() const { return std::holds_alternative<DeterministicEvolution>(evolution_); }
  bool is_iid() const { return std::holds_alternative<IidEvolution>(evolution_); }
  bool is_controlled_markov() const {
    return std::holds_alternative<ControlledMarkovEvolution>(evolution_);
  }
  bool is_exogenous() const { return std::holds_alternative<ExogenousEvolution>(evolution_); }

  // Deterministic transition g(s, a); contract error on other variants.
  int g(int state, std::int64_t action) const;

  // One state transition for the Deterministic, IidPerAction and
  // ControlledMarkov variants. Deterministic ignores rng entirely.
  int step(int state, std::int64_t action, RngStream& rng) const;
  int step(int state, std::span<const int> assoc, RngStream& rng) const {
    return step(state, action_index(assoc), rng);
  }

  // One transition of the action-independent ExogenousErgodic chain.
  int step_exogenous(int state, RngStream& rng) const;

  // Finite-horizon per-user mean rate of an association-vector sequence
  // played from s0 under the deterministic transition map.
  std::vector<double> average_rate(int s0, std::span<const std::vector<int>> actions) const;
  std::vector<double> average_rate_indexed(int s0, std::span<const std::int64_t> actions) const;

 private:
  int num_users_;
  int num_aps_;
  int num_states_;
  std::vector<std::vector<int>> assoc_sets_;
  std::int64_t num_actions_;
  std::vector<std::int64_t> strides_;
  std::vector<double> rate_table_;
  Evolution evolution_;
};

}  // namespace ua
