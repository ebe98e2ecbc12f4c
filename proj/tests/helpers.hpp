#pragma once

#include <functional>
#include <vector>

#include "ua/model.hpp"
#include "ua/utility.hpp"

namespace ua::test {

// Dense rate table from a callback f(state, action, user).
inline std::vector<double> rate_table(int num_states, std::int64_t num_actions, int num_users,
                                      const std::function<double(int, std::int64_t, int)>& f) {
  std::vector<double> table;
  table.reserve(static_cast<std::size_t>(num_states) * num_actions * num_users);
  for (int s = 0; s < num_states; ++s) {
    for (std::int64_t a = 0; a < num_actions; ++a) {
      for (int i = 0; i < num_users; ++i) table.push_back(f(s, a, i));
    }
  }
  return table;
}

// Everyone may associate with every AP.
inline std::vector<std::vector<int>> full_assoc(int num_users, int num_aps) {
  std::vector<std::vector<int>> sets(num_users);
  for (auto& s : sets) {
    for (int m = 0; m < num_aps; ++m) s.push_back(m);
  }
  return sets;
}

// Deterministic map from a callback g(state, action).
inline ua::DeterministicEvolution det_map(int num_states, std::int64_t num_actions,
                                          const std::function<int(int, std::int64_t)>& g) {
  ua::DeterministicEvolution evo;
  evo.next.assign(num_states, std::vector<int>(num_actions, 0));
  for (int s = 0; s < num_states; ++s) {
    for (std::int64_t a = 0; a < num_actions; ++a) evo.next[s][a] = g(s, a);
  }
  return evo;
}

inline ua::NetworkModel det_model(int num_users, int num_aps, int num_states,
                                  const std::function<double(int, std::int64_t, int)>& rates,
                                  const std::function<int(int, std::int64_t)>& g) {
  std::int64_t num_actions = 1;
  for (int i = 0; i < num_users; ++i) num_actions *= num_aps;
  return ua::NetworkModel(num_users, num_aps, full_assoc(num_users, num_aps), num_states,
                          rate_table(num_states, num_actions, num_users, rates),
                          det_map(num_states, num_actions, g));
}

}  // namespace ua::test
