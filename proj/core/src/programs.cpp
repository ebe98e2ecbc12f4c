#include "ua/programs.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "ua/errors.hpp"
#include "ua/rng.hpp"
#include "ua/simplex.hpp"

namespace ua {

namespace {

// Indices of columns on the weak Pareto frontier (duplicates collapse to
// the first occurrence). Safe for every program here: utilities are
// nondecreasing and column contributions enter the rates additively.
//
// A dominator never has a smaller coordinate sum, so scanning in
// descending-sum order only needs to test against already-kept columns.
std::vector<int> pareto_filter(const std::vector<std::vector<double>>& columns) {
  const int n = static_cast<int>(columns.size());
  std::vector<int> order(n);
  for (int c = 0; c < n; ++c) order[c] = c;
  std::vector<double> sums(n, 0.0);
  for (int c = 0; c < n; ++c) {
    for (const double v : columns[c]) sums[c] += v;
  }
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    if (sums[a] != sums[b]) return sums[a] > sums[b];
    return a < b;
  });
  std::vector<int> kept;
  for (const int c : order) {
    bool dominated = false;
    for (const int d : kept) {
      bool ge = true;
      for (std::size_t i = 0; i < columns[c].size(); ++i) {
        if (columns[d][i] < columns[c][i]) {
          ge = false;
          break;
        }
      }
      if (ge) {
        dominated = true;
        break;
      }
    }
    if (!dominated) kept.push_back(c);
  }
  std::sort(kept.begin(), kept.end());
  return kept;
}

std::int64_t grid_point_count(int columns, int grid_k, bool sum_to_one, std::int64_t cap) {
  // C(K + columns - 1, columns - 1) compositions, or sums over j <= K for
  // the sub-simplex; computed with saturation at `cap`.
  auto choose = [cap](std::int64_t n, std::int64_t k) {
    double v = 1.0;
    for (std::int64_t i = 1; i <= k; ++i) {
      v *= static_cast<double>(n - k + i) / static_cast<double>(i);
      if (v > static_cast<double>(cap) * 2) return cap + 1;
    }
    return static_cast<std::int64_t>(v + 0.5);
  };
  if (sum_to_one) return choose(grid_k + columns - 1, columns - 1);
  return choose(grid_k + columns, columns);
}

// Enumerates integer weight vectors j over `columns` columns with
// sum j == grid_k (or <= when sum_to_one is false), calling visit(rates)
// with the accumulated rate vector for each grid point.
class GridEnumerator {
 public:
  GridEnumerator(const std::vector<std::vector<double>>& columns, int grid_k, bool sum_to_one,
                 int dim)
      : columns_(columns), grid_k_(grid_k), sum_to_one_(sum_to_one), rates_(dim, 0.0) {
    units_.assign(columns.size(), 0);
  }

  void enumerate(const std::function<void(std::span<const double> rates,
                                          std::span<const int> units)>& visit) {
    visit_ = &visit;
    recurse(0, grid_k_);
  }

 private:
  void recurse(std::size_t col, int remaining) {
    if (col + 1 == columns_.size()) {
      const int lo = sum_to_one_ ? remaining : 0;
      for (int u = lo; u <= remaining; ++u) {
        add(col, u);
        (*visit_)(rates_, units_);
        add(col, -u);
      }
      return;
    }
    for (int u = 0; u <= remaining; ++u) {
      add(col, u);
      recurse(col + 1, remaining - u);
      add(col, -u);
    }
  }

  void add(std::size_t col, int u) {
    if (u == 0) return;
    units_[col] += u;
    const double w = static_cast<double>(u) / grid_k_;
    for (std::size_t i = 0; i < rates_.size(); ++i) rates_[i] += w * columns_[col][i];
  }

  const std::vector<std::vector<double>>& columns_;
  int grid_k_;
  bool sum_to_one_;
  std::vector<double> rates_;
  std::vector<int> units_;
  const std::function<void(std::span<const double>, std::span<const int>)>* visit_ = nullptr;
};

struct BestPoint {
  double value = -1.0;
  std::vector<double> rates;
  std::vector<int> units;
};

BestPoint best_grid_point(const std::vector<std::vector<double>>& all_columns,
                          const UtilityProfile& utility, int grid_k, bool sum_to_one,
                          std::int64_t guard, std::vector<int>* kept_out) {
  if (grid_k < 1) throw std::invalid_argument("grid K must be >= 1");
  if (all_columns.empty()) throw std::invalid_argument("grid program needs at least one column");
  const auto kept = pareto_filter(all_columns);
  std::vector<std::vector<double>> columns;
  columns.reserve(kept.size());
  for (const int c : kept) columns.push_back(all_columns[c]);

  const auto count =
      grid_point_count(static_cast<int>(columns.size()), grid_k, sum_to_one, guard);
  if (count > guard) {
    throw GuardError("grid enumeration would visit " + std::to_string(count) +
                     " points; use grid coarsening (smaller K) or fewer columns");
  }

  BestPoint best;
  GridEnumerator enumerator(columns, grid_k, sum_to_one, utility.num_users());
  enumerator.enumerate([&](std::span<const double> rates, std::span<const int> units) {
    const double v = utility.sum_value(rates);
    if (v > best.value) {
      best.value = v;
      best.rates.assign(rates.begin(), rates.end());
      best.units.assign(units.begin(), units.end());
    }
  });
  *kept_out = kept;
  return best;
}

std::vector<double> scatter_weights(const BestPoint& best, const std::vector<int>& kept,
                                    std::size_t total, int grid_k) {
  std::vector<double> weights(total, 0.0);
  for (std::size_t k = 0; k < kept.size(); ++k) {
    weights[kept[k]] = static_cast<double>(best.units[k]) / grid_k;
  }
  return weights;
}

}  // namespace

ProgramSolution solve_cycle_program(const NetworkModel& model, const UtilityProfile& utility,
                                    const std::vector<ConfigurationCycle>& cycles, int grid_k,
                                    std::int64_t guard) {
  const auto columns = cycle_rates(model, cycles);
  std::vector<int> kept;
  const auto best = best_grid_point(columns, utility, grid_k, /*sum_to_one=*/false, guard, &kept);
  ProgramSolution out;
  out.weights = scatter_weights(best, kept, columns.size(), grid_k);
  out.rates = best.rates;
  out.sum_utility = best.value;
  return out;
}

ProgramSolution solve_action_grid_program(const NetworkModel& model,
                                          const UtilityProfile& utility, int grid_k,
                                          std::int64_t guard) {
  std::vector<std::vector<double>> columns;
  columns.reserve(static_cast<std::size_t>(model.num_actions()));
  for (std::int64_t a = 0; a < model.num_actions(); ++a) {
    columns.push_back(expected_payoff_iid(model, a));
  }
  std::vector<int> kept;
  const auto best = best_grid_point(columns, utility, grid_k, /*sum_to_one=*/true, guard, &kept);
  ProgramSolution out;
  out.weights = scatter_weights(best, kept, columns.size(), grid_k);
  out.rates = best.rates;
  out.sum_utility = best.value;
  return out;
}

ProgramSolution solve_state_grid_program(const NetworkModel& model,
                                         const UtilityProfile& utility, int grid_k,
                                         std::int64_t guard) {
  if (grid_k < 1) throw std::invalid_argument("grid K must be >= 1");
  const auto mu = exogenous_time_average(model);
  const int num_states = model.num_states();
  const int n = model.num_users();

  // Per state: candidate contribution vectors mu_s * sum_a p(a|s) r(a, s)
  // over the 1/K grid, built from Pareto-filtered action columns and then
  // filtered again.
  struct Candidate {
    std::vector<double> contribution;
    std::vector<int> units;  // over kept columns
  };
  std::vector<std::vector<Candidate>> per_state(num_states);
  std::vector<std::vector<int>> kept_per_state(num_states);

  for (int s = 0; s < num_states; ++s) {
    std::vector<std::vector<double>> columns;
    columns.reserve(static_cast<std::size_t>(model.num_actions()));
    for (std::int64_t a = 0; a < model.num_actions(); ++a) {
      const auto r = model.rates_at(s, a);
      std::vector<double> col(n);
      for (int i = 0; i < n; ++i) col[i] = mu[s] * r[i];
      columns.push_back(std::move(col));
    }
    const auto kept = pareto_filter(columns);
    std::vector<std::vector<double>> pruned;
    for (const int c : kept) pruned.push_back(columns[c]);

    const auto count =
        grid_point_count(static_cast<int>(pruned.size()), grid_k, /*sum_to_one=*/true, guard);
    if (count > guard) {
      throw GuardError("per-state grid would visit " + std::to_string(count) +
                       " points; use grid coarsening");
    }
    std::vector<Candidate> candidates;
    GridEnumerator enumerator(pruned, grid_k, /*sum_to_one=*/true, n);
    enumerator.enumerate([&](std::span<const double> rates, std::span<const int> units) {
      candidates.push_back(
          {{rates.begin(), rates.end()}, {units.begin(), units.end()}});
    });
    // Drop dominated grid points before taking the cross-state product.
    std::vector<std::vector<double>> contribs;
    contribs.reserve(candidates.size());
    for (const auto& c : candidates) contribs.push_back(c.contribution);
    const auto undominated = pareto_filter(contribs);
    std::vector<Candidate> filtered;
    filtered.reserve(undominated.size());
    for (const int idx : undominated) filtered.push_back(std::move(candidates[idx]));
    per_state[s] = std::move(filtered);
    kept_per_state[s] = kept;
  }

  double product = 1.0;
  for (const auto& c : per_state) product *= static_cast<double>(c.size());
  if (product > static_cast<double>(guard)) {
    throw GuardError("cross-state grid product too large; use grid coarsening");
  }

  // DFS over states accumulating the total rate vector.
  std::vector<double> acc(n, 0.0);
  std::vector<int> choice(num_states, 0);
  std::vector<int> best_choice;
  double best_value = -1.0;
  std::vector<double> best_rates;
  std::function<void(int)> rec = [&](int s) {
    if (s == num_states) {
      const double v = utility.sum_value(acc);
      if (v > best_value) {
        best_value = v;
        best_rates = acc;
        best_choice = choice;
      }
      return;
    }
    for (std::size_t k = 0; k < per_state[s].size(); ++k) {
      choice[s] = static_cast<int>(k);
      const auto& contrib = per_state[s][k].contribution;
      for (int i = 0; i < n; ++i) acc[i] += contrib[i];
      rec(s + 1);
      for (int i = 0; i < n; ++i) acc[i] -= contrib[i];
    }
  };
  rec(0);

  ProgramSolution out;
  out.per_state.assign(num_states,
                       std::vector<double>(static_cast<std::size_t>(model.num_actions()), 0.0));
  for (int s = 0; s < num_states; ++s) {
    const auto& cand = per_state[s][best_choice[s]];
    for (std::size_t k = 0; k < kept_per_state[s].size(); ++k) {
      out.per_state[s][kept_per_state[s][k]] = static_cast<double>(cand.units[k]) / grid_k;
    }
  }
  out.rates = best_rates;
  out.sum_utility = best_value;
  return out;
}

ProgramSolution solve_control_grid_program(const NetworkModel& model,
                                           const UtilityProfile& utility, int grid_k,
                                           std::int64_t guard, std::int64_t max_controls) {
  const auto controls = enumerate_controls(model, max_controls);
  std::vector<std::vector<double>> columns;
  columns.reserve(controls.size());
  for (const auto& h : controls) columns.push_back(expected_payoff_control(model, h));
  std::vector<int> kept;
  const auto best = best_grid_point(columns, utility, grid_k, /*sum_to_one=*/true, guard, &kept);
  ProgramSolution out;
  out.weights = scatter_weights(best, kept, columns.size(), grid_k);
  out.rates = best.rates;
  out.sum_utility = best.value;
  return out;
}

ProgramSolution solve_cycle_program_continuous(const NetworkModel& model,
                                               const UtilityProfile& utility,
                                               const std::vector<ConfigurationCycle>& cycles,
                                               int iterations, int multistarts,
                                               std::uint64_t seed) {
  const auto columns = cycle_rates(model, cycles);
  const int num_cols = static_cast<int>(columns.size());
  const int n = model.num_users();

  const auto rates_of = [&](const std::vector<double>& p) {
    std::vector<double> r(n, 0.0);
    for (int c = 0; c < num_cols; ++c) {
      if (p[c] == 0.0) continue;
      for (int i = 0; i < n; ++i) r[i] += p[c] * columns[c][i];
    }
    return r;
  };
  const auto gradient_of = [&](const std::vector<double>& rates) {
    std::vector<double> du(n);
    for (int i = 0; i < n; ++i) du[i] = utility.user(i).left_derivative(rates[i]);
    std::vector<double> g(num_cols, 0.0);
    for (int c = 0; c < num_cols; ++c) {
      for (int i = 0; i < n; ++i) g[c] += du[i] * columns[c][i];
    }
    return g;
  };

  RngStream rng = derive_stream(seed, kStreamInit);
  std::vector<double> best_p;
  double best_value = -1.0;
  for (int start = 0; start < multistarts; ++start) {
    std::vector<double> p(num_cols, 1.0 / num_cols);
    if (start > 0) {
      double sum = 0.0;
      for (double& v : p) {
        v = -std::log(std::max(rng.uniform01(), 1e-300));
        sum += v;
      }
      for (double& v : p) v /= sum;
    }
    for (int it = 1; it <= iterations; ++it) {
      const auto g = gradient_of(rates_of(p));
      const double step = 0.5 / std::sqrt(static_cast<double>(it));
      for (int c = 0; c < num_cols; ++c) p[c] += step * g[c];
      p = project_to_subsimplex(p);
    }
    const double v = utility.sum_value(rates_of(p));
    if (v > best_value) {
      best_value = v;
      best_p = p;
    }
  }

  // Frank-Wolfe gap at the best point: an optimality certificate for
  // concave utilities.
  const auto rates = rates_of(best_p);
  const auto g = gradient_of(rates);
  double lin_max = 0.0;  // feasible set contains p = 0
  for (const double gc : g) lin_max = std::max(lin_max, gc);
  double lin_cur = 0.0;
  for (int c = 0; c < num_cols; ++c) lin_cur += g[c] * best_p[c];

  ProgramSolution out;
  out.weights = best_p;
  out.rates = rates;
  out.sum_utility = best_value;
  out.certificate_gap = std::max(0.0, lin_max - lin_cur);
  return out;
}

}  // namespace ua
