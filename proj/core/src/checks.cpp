#include "ua/checks.hpp"

#include <cstdint>
#include <functional>

#include "ua/errors.hpp"

namespace ua {

IrreducibilityResult check_irreducibility(const NetworkModel& model) {
  if (!model.is_deterministic()) {
    throw ContractError("check_irreducibility requires the deterministic evolution variant");
  }
  const int n = model.num_states();
  // reach[s] = set of states reachable from s, by forward BFS.
  for (int s0 = 0; s0 < n; ++s0) {
    std::vector<char> seen(n, 0);
    std::vector<int> queue{s0};
    seen[s0] = 1;
    while (!queue.empty()) {
      const int s = queue.back();
      queue.pop_back();
      for (std::int64_t a = 0; a < model.num_actions(); ++a) {
        const int t = model.g(s, a);
        if (!seen[t]) {
          seen[t] = 1;
          queue.push_back(t);
        }
      }
    }
    for (int t = 0; t < n; ++t) {
      if (!seen[t]) {
        return {false, IrreducibilityWitness{s0, t}};
      }
    }
  }
  return {true, std::nullopt};
}

namespace {

constexpr int kMaxInterdependenceUsers = 12;

// Expected per-user rates under mu(.|a), one row per joint action.
std::vector<std::vector<double>> expected_rate_rows(const NetworkModel& model) {
  const auto& iid = std::get<IidEvolution>(model.evolution());
  std::vector<std::vector<double>> rows(static_cast<std::size_t>(model.num_actions()),
                                        std::vector<double>(model.num_users(), 0.0));
  for (std::int64_t a = 0; a < model.num_actions(); ++a) {
    for (int s = 0; s < model.num_states(); ++s) {
      const double p = iid.pmf[static_cast<std::size_t>(a)][s];
      if (p == 0.0) continue;
      const auto r = model.rates_at(s, a);
      for (int i = 0; i < model.num_users(); ++i) rows[a][i] += p * r[i];
    }
  }
  return rows;
}

// Core quantifier loop. `payoff(a, j)` returns the quantity that must react
// to a deviation; `states` is the list of state tags to report in witnesses.
InterdependenceResult run_check(
    const NetworkModel& model, const std::vector<int>& states,
    const std::function<double(int state, std::int64_t action, int user)>& payoff) {
  const int n = model.num_users();
  if (n > kMaxInterdependenceUsers) {
    throw GuardError("interdependence check enumerates all user subsets; N <= 12 required");
  }
  if (n == 1) return {true, std::nullopt};  // no proper nonempty subset exists

  std::vector<std::int64_t> strides(n);
  {
    std::int64_t acc = 1;
    for (int i = n - 1; i >= 0; --i) {
      strides[i] = acc;
      acc *= model.user_action_count(i);
    }
  }

  for (int mask = 1; mask < (1 << n) - 1; ++mask) {
    std::vector<int> members;
    for (int i = 0; i < n; ++i) {
      if (mask & (1 << i)) members.push_back(i);
    }
    for (const int s : states) {
      for (std::int64_t a = 0; a < model.num_actions(); ++a) {
        // Walk every deviation a' that changes only the N' coordinates and
        // look for an outside user whose payoff moves.
        bool found = false;
        std::vector<int> pos(members.size(), 0);
        while (!found) {
          std::int64_t a2 = a;
          for (std::size_t k = 0; k < members.size(); ++k) {
            const int u = members[k];
            const auto cur = (a / strides[u]) % model.user_action_count(u);
            a2 += (pos[k] - cur) * strides[u];
          }
          if (a2 != a) {
            for (int j = 0; j < n && !found; ++j) {
              if (mask & (1 << j)) continue;
              if (payoff(s, a, j) != payoff(s, a2, j)) found = true;
            }
          }
          // next deviation
          std::size_t k = 0;
          while (k < members.size()) {
            if (++pos[k] < model.user_action_count(members[k])) break;
            pos[k] = 0;
            ++k;
          }
          if (k == members.size()) break;
        }
        if (!found) {
          return {false, InterdependenceWitness{s, members, model.assoc_from_index(a)}};
        }
      }
    }
  }
  return {true, std::nullopt};
}

}  // namespace

InterdependenceResult check_interdependence_per_state(const NetworkModel& model) {
  if (model.is_iid()) {
    throw ContractError("per-state interdependence is undefined for iid evolution; "
                        "use check_interdependence_expected");
  }
  std::vector<int> states(model.num_states());
  for (int s = 0; s < model.num_states(); ++s) states[s] = s;
  return run_check(model, states, [&model](int s, std::int64_t a, int j) {
    return model.rates_at(s, a)[j];
  });
}

InterdependenceResult check_interdependence_expected(const NetworkModel& model) {
  if (!model.is_iid()) {
    throw ContractError("expected-rate interdependence requires iid evolution");
  }
  const auto rows = expected_rate_rows(model);
  return run_check(model, {-1}, [&rows](int, std::int64_t a, int j) {
    return rows[static_cast<std::size_t>(a)][j];
  });
}

InterdependenceResult check_interdependence(const NetworkModel& model) {
  return model.is_iid() ? check_interdependence_expected(model)
                        : check_interdependence_per_state(model);
}

}  // namespace ua
