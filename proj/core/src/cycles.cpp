#include "ua/cycles.hpp"

#include <algorithm>

#include "ua/errors.hpp"
#include "ua/simplex.hpp"

namespace ua {

bool cycle_is_consistent(const NetworkModel& model, const ConfigurationCycle& cycle) {
  const int n = cycle.length();
  if (n == 0 || static_cast<int>(cycle.actions.size()) != n) return false;
  for (int j = 0; j < n; ++j) {
    const int succ = model.g(cycle.states[j], cycle.actions[j]);
    if (succ != cycle.states[(j + 1) % n]) return false;
  }
  return true;
}

std::vector<ConfigurationCycle> enumerate_basic_cycles(const NetworkModel& model,
                                                       CycleEnumerationOptions opts) {
  if (!model.is_deterministic()) {
    throw ContractError("cycle enumeration requires the deterministic evolution variant");
  }
  const std::int64_t num_actions = model.num_actions();
  const std::int64_t num_nodes = static_cast<std::int64_t>(model.num_states()) * num_actions;
  if (num_nodes > opts.max_nodes) {
    throw GuardError("cycle enumeration guard exceeded: |S x A| = " + std::to_string(num_nodes));
  }
  const int max_len = opts.max_length > 0
                          ? std::min<std::int64_t>(opts.max_length, num_nodes)
                          : static_cast<int>(num_nodes);

  // Node id = state * |A| + action. Successor state of a node is fixed by g,
  // so the children of (s, a) are (g(s, a), a') for every a'.
  const auto node_state = [&](std::int64_t v) { return static_cast<int>(v / num_actions); };
  const auto node_action = [&](std::int64_t v) { return v % num_actions; };

  std::vector<ConfigurationCycle> out;
  std::int64_t emitted = 0;
  std::vector<char> on_path(static_cast<std::size_t>(num_nodes), 0);
  std::vector<std::int64_t> path;

  // Each basic cycle is emitted exactly once: rooted at its smallest node,
  // exploring only nodes greater than the root.
  for (std::int64_t root = 0; root < num_nodes; ++root) {
    struct Frame {
      std::int64_t node;
      std::int64_t next_action;
    };
    std::vector<Frame> stack;
    path.clear();
    path.push_back(root);
    on_path[root] = 1;
    stack.push_back({root, 0});
    while (!stack.empty()) {
      Frame& top = stack.back();
      if (top.next_action >= num_actions) {
        on_path[top.node] = 0;
        path.pop_back();
        stack.pop_back();
        continue;
      }
      const int succ_state = model.g(node_state(top.node), node_action(top.node));
      const std::int64_t child =
          static_cast<std::int64_t>(succ_state) * num_actions + top.next_action++;
      if (child == root) {
        ConfigurationCycle cycle;
        cycle.states.reserve(path.size());
        cycle.actions.reserve(path.size());
        for (const std::int64_t v : path) {
          cycle.states.push_back(node_state(v));
          cycle.actions.push_back(node_action(v));
        }
        out.push_back(std::move(cycle));
        if (++emitted > opts.max_cycles) {
          throw GuardError("cycle enumeration guard exceeded: more than " +
                           std::to_string(opts.max_cycles) + " basic cycles");
        }
        continue;
      }
      if (child > root && !on_path[child] && static_cast<int>(path.size()) < max_len) {
        on_path[child] = 1;
        path.push_back(child);
        stack.push_back({child, 0});
      }
    }
  }
  return out;
}

std::vector<double> cycle_rate(const NetworkModel& model, const ConfigurationCycle& cycle) {
  std::vector<double> mean(model.num_users(), 0.0);
  for (int j = 0; j < cycle.length(); ++j) {
    const auto r = model.rates_at(cycle.states[j], cycle.actions[j]);
    for (int i = 0; i < model.num_users(); ++i) mean[i] += r[i];
  }
  for (double& m : mean) m /= cycle.length();
  return mean;
}

std::vector<std::vector<double>> cycle_rates(const NetworkModel& model,
                                             const std::vector<ConfigurationCycle>& cycles) {
  std::vector<std::vector<double>> rates;
  rates.reserve(cycles.size());
  for (const auto& c : cycles) rates.push_back(cycle_rate(model, c));
  return rates;
}

HullMembership hull_membership(std::span<const double> point,
                               const std::vector<std::vector<double>>& rate_vectors,
                               double tol) {
  std::vector<double> relaxed(point.begin(), point.end());
  for (double& v : relaxed) v -= tol;
  auto weights = dominance_weights(rate_vectors, relaxed, 1.0, tol);
  if (!weights) return {false, {}};
  return {true, std::move(*weights)};
}

}  // namespace ua
