#include "ua/subgradient.hpp"

#include <cmath>
#include <stdexcept>

#include "ua/markov.hpp"
#include "ua/rng.hpp"
#include "ua/simplex.hpp"

namespace ua {

ProgramVariant program_variant_from_string(const std::string& name) {
  if (name == "cycles") return ProgramVariant::kCycles;
  if (name == "iid-action") return ProgramVariant::kIidAction;
  if (name == "per-state") return ProgramVariant::kPerState;
  if (name == "controls") return ProgramVariant::kControls;
  throw std::invalid_argument("unknown program variant: " + name);
}

std::string to_string(ProgramVariant variant) {
  switch (variant) {
    case ProgramVariant::kCycles: return "cycles";
    case ProgramVariant::kIidAction: return "iid-action";
    case ProgramVariant::kPerState: return "per-state";
    case ProgramVariant::kControls: return "controls";
  }
  return "?";
}

BaselineResult subgradient_over_columns(
    const std::vector<std::vector<std::vector<double>>>& blocks, const UtilityProfile& utility,
    bool sum_to_one, const SubgradientConfig& config) {
  const int n = utility.num_users();
  std::vector<std::size_t> offsets;
  std::size_t total = 0;
  for (const auto& block : blocks) {
    offsets.push_back(total);
    total += block.size();
  }

  const auto rates_of = [&](const std::vector<double>& p) {
    std::vector<double> r(n, 0.0);
    for (std::size_t b = 0; b < blocks.size(); ++b) {
      for (std::size_t c = 0; c < blocks[b].size(); ++c) {
        const double w = p[offsets[b] + c];
        if (w == 0.0) continue;
        for (int i = 0; i < n; ++i) r[i] += w * blocks[b][c][i];
      }
    }
    return r;
  };
  const auto subgradient_of = [&](const std::vector<double>& rates) {
    std::vector<double> du(n);
    for (int i = 0; i < n; ++i) du[i] = utility.user(i).left_derivative(rates[i]);
    std::vector<double> g(total, 0.0);
    for (std::size_t b = 0; b < blocks.size(); ++b) {
      for (std::size_t c = 0; c < blocks[b].size(); ++c) {
        double acc = 0.0;
        for (int i = 0; i < n; ++i) acc += du[i] * blocks[b][c][i];
        g[offsets[b] + c] = acc;
      }
    }
    return g;
  };
  const auto project = [&](std::vector<double>& p) {
    for (std::size_t b = 0; b < blocks.size(); ++b) {
      const std::span<double> view(p.data() + offsets[b], blocks[b].size());
      const std::vector<double> projected =
          sum_to_one ? project_to_simplex({view.data(), view.size()})
                     : project_to_subsimplex({view.data(), view.size()});
      std::copy(projected.begin(), projected.end(), view.begin());
    }
  };

  RngStream rng = derive_stream(config.seed, kStreamInit);
  BaselineResult best;
  best.best_value = -1.0;
  for (int start = 0; start < config.multistarts; ++start) {
    std::vector<double> p(total);
    if (start == 0) {
      for (std::size_t b = 0; b < blocks.size(); ++b) {
        for (std::size_t c = 0; c < blocks[b].size(); ++c) {
          p[offsets[b] + c] = 1.0 / static_cast<double>(blocks[b].size());
        }
      }
    } else {
      for (std::size_t b = 0; b < blocks.size(); ++b) {
        double sum = 0.0;
        for (std::size_t c = 0; c < blocks[b].size(); ++c) {
          const double v = -std::log(std::max(rng.uniform01(), 1e-300));
          p[offsets[b] + c] = v;
          sum += v;
        }
        for (std::size_t c = 0; c < blocks[b].size(); ++c) p[offsets[b] + c] /= sum;
      }
    }

    std::vector<double> trajectory;
    double local_best = -1.0;
    std::vector<double> local_best_point;
    for (int it = 0; it <= config.iterations; ++it) {
      const auto rates = rates_of(p);
      const double value = utility.sum_value(rates);
      trajectory.push_back(value);
      if (value > local_best) {
        local_best = value;
        local_best_point = p;
      }
      if (it == config.iterations) break;
      const auto g = subgradient_of(rates);
      const double step = config.step_rule == SubgradientConfig::StepRule::kConstant
                              ? config.step_size
                              : config.step_size / std::sqrt(static_cast<double>(it + 1));
      for (std::size_t c = 0; c < total; ++c) p[c] += step * g[c];
      project(p);
    }
    if (local_best > best.best_value) {
      best.best_value = local_best;
      best.best_point = local_best_point;
      best.trajectory = trajectory;
    }
  }
  best.best_rates = rates_of(best.best_point);
  return best;
}

BaselineResult subgradient_baseline(const NetworkModel& model, const UtilityProfile& utility,
                                    ProgramVariant variant, const SubgradientConfig& config) {
  std::vector<std::vector<std::vector<double>>> blocks;
  bool sum_to_one = true;
  switch (variant) {
    case ProgramVariant::kCycles: {
      const auto cycles = enumerate_basic_cycles(model);
      blocks.push_back(cycle_rates(model, cycles));
      sum_to_one = false;
      break;
    }
    case ProgramVariant::kIidAction: {
      std::vector<std::vector<double>> columns;
      for (std::int64_t a = 0; a < model.num_actions(); ++a) {
        columns.push_back(expected_payoff_iid(model, a));
      }
      blocks.push_back(std::move(columns));
      break;
    }
    case ProgramVariant::kPerState: {
      const auto mu = exogenous_time_average(model);
      for (int s = 0; s < model.num_states(); ++s) {
        std::vector<std::vector<double>> columns;
        for (std::int64_t a = 0; a < model.num_actions(); ++a) {
          const auto r = model.rates_at(s, a);
          std::vector<double> col(model.num_users());
          for (int i = 0; i < model.num_users(); ++i) col[i] = mu[s] * r[i];
          columns.push_back(std::move(col));
        }
        blocks.push_back(std::move(columns));
      }
      break;
    }
    case ProgramVariant::kControls: {
      const auto controls = enumerate_controls(model);
      std::vector<std::vector<double>> columns;
      for (const auto& h : controls) columns.push_back(expected_payoff_control(model, h));
      blocks.push_back(std::move(columns));
      break;
    }
  }
  return subgradient_over_columns(blocks, utility, sum_to_one, config);
}

ProgramSolution exhaustive_optimum(const NetworkModel& model, const UtilityProfile& utility,
                                   ProgramVariant variant, int grid_k, std::int64_t guard) {
  switch (variant) {
    case ProgramVariant::kCycles:
      return solve_cycle_program(model, utility, enumerate_basic_cycles(model), grid_k, guard);
    case ProgramVariant::kIidAction:
      return solve_action_grid_program(model, utility, grid_k, guard);
    case ProgramVariant::kPerState:
      return solve_state_grid_program(model, utility, grid_k, guard);
    case ProgramVariant::kControls:
      return solve_control_grid_program(model, utility, grid_k, guard);
  }
  throw std::logic_error("unreachable");
}

}  // namespace ua
