#include "ua/scenario.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "ua/checks.hpp"
#include "ua/errors.hpp"

namespace ua {

namespace {

double dist(const Point& a, const Point& b) {
  return std::hypot(a.x - b.x, a.y - b.y);
}

}  // namespace

double wifi_solo_rate(double distance) {
  if (distance <= 10.0) return 1.0;
  if (distance <= 20.0) return 0.8;
  if (distance <= 30.0) return 0.6;
  if (distance <= 45.0) return 0.35;
  if (distance <= 60.0) return 0.15;
  return 0.05;
}

Scenario make_wifi_scenario(int num_users, const std::vector<Point>& user_positions,
                            const std::vector<Point>& ap_positions, int num_channels,
                            WifiEvolutionKind evolution, double reach) {
  const int num_aps = static_cast<int>(ap_positions.size());
  if (num_users < 1) throw std::invalid_argument("wifi scenario needs at least one user");
  if (num_aps < 1) throw std::invalid_argument("wifi scenario needs at least one AP");
  if (static_cast<int>(user_positions.size()) != num_users) {
    throw std::invalid_argument("one position per user required");
  }
  if (num_channels < 1 || num_channels > num_aps) {
    throw std::invalid_argument("num_channels must lie in [1, num_aps]");
  }

  std::vector<std::vector<int>> assoc_sets(num_users);
  for (int i = 0; i < num_users; ++i) {
    int closest = 0;
    for (int m = 0; m < num_aps; ++m) {
      const double d = dist(user_positions[i], ap_positions[m]);
      if (d <= reach) assoc_sets[i].push_back(m);
      if (d < dist(user_positions[i], ap_positions[closest])) closest = m;
    }
    if (assoc_sets[i].empty()) assoc_sets[i].push_back(closest);
  }

  // One state per AP: state s means AP s operates on an orthogonal channel
  // alone and the other APs split the remaining channels.
  const int num_states = num_aps;
  const double shared_factor =
      num_aps == 1 ? 1.0
                   : std::min(1.0, static_cast<double>(num_channels - 1) /
                                       static_cast<double>(num_aps - 1));

  // Temporary model just for action indexing.
  std::vector<std::int64_t> strides(num_users, 1);
  std::int64_t num_actions = 1;
  for (int i = num_users - 1; i >= 0; --i) {
    strides[i] = num_actions;
    num_actions *= static_cast<std::int64_t>(assoc_sets[i].size());
  }

  std::vector<double> rate_table(
      static_cast<std::size_t>(num_states) * num_actions * num_users, 0.0);
  std::vector<std::vector<int>> det_next(num_states, std::vector<int>(num_actions, 0));

  std::vector<int> load(num_aps);
  for (std::int64_t a = 0; a < num_actions; ++a) {
    std::fill(load.begin(), load.end(), 0);
    std::vector<int> ap_of(num_users);
    for (int i = 0; i < num_users; ++i) {
      const auto pos = (a / strides[i]) % static_cast<std::int64_t>(assoc_sets[i].size());
      ap_of[i] = assoc_sets[i][static_cast<int>(pos)];
      ++load[ap_of[i]];
    }
    int busiest = 0;
    for (int m = 1; m < num_aps; ++m) {
      if (load[m] > load[busiest]) busiest = m;  // ties keep the lowest index
    }
    for (int s = 0; s < num_states; ++s) {
      det_next[s][a] = busiest;
      for (int i = 0; i < num_users; ++i) {
        const double solo = wifi_solo_rate(dist(user_positions[i], ap_positions[ap_of[i]]));
        const double channel = (ap_of[i] == s) ? 1.0 : shared_factor;
        rate_table[(static_cast<std::size_t>(s) * num_actions + a) * num_users + i] =
            solo * channel / load[ap_of[i]];
      }
    }
  }

  Evolution evo;
  switch (evolution) {
    case WifiEvolutionKind::kDeterministicMaxLoad:
      evo = DeterministicEvolution{std::move(det_next)};
      break;
    case WifiEvolutionKind::kUniformIid: {
      std::vector<std::vector<double>> pmf(
          num_actions, std::vector<double>(num_states, 1.0 / num_states));
      evo = IidEvolution{std::move(pmf)};
      break;
    }
    case WifiEvolutionKind::kUniformExogenous: {
      std::vector<std::vector<double>> rows(
          num_states, std::vector<double>(num_states, 1.0 / num_states));
      evo = ExogenousEvolution{std::move(rows)};
      break;
    }
  }

  NetworkModel model(num_users, num_aps, std::move(assoc_sets), num_states,
                     std::move(rate_table), std::move(evo));
  return Scenario{std::move(model), default_log_utility(num_users)};
}

Scenario standard_wifi_scenario(WifiEvolutionKind evolution) {
  const double h = 25.0 * std::sqrt(3.0) / 2.0;
  const std::vector<Point> aps = {{0.0, 0.0}, {25.0, 0.0}, {12.5, h}};
  const std::vector<Point> users = {
      {4.0, 1.0}, {21.0, 1.0}, {12.5, 23.5}, {12.5, 6.0}, {8.0, 12.0}};
  return make_wifi_scenario(5, users, aps, 2, evolution);
}

NetworkModel random_interdependent_instance(const RandomInstanceSpec& spec,
                                            std::uint64_t seed) {
  RngStream rng = derive_stream(seed, kStreamInit);
  std::vector<std::vector<int>> assoc_sets(spec.num_users);
  for (auto& s : assoc_sets) {
    s.resize(spec.num_aps);
    for (int m = 0; m < spec.num_aps; ++m) s[m] = m;
  }
  std::int64_t num_actions = 1;
  for (int i = 0; i < spec.num_users; ++i) num_actions *= spec.num_aps;

  for (int attempt = 0; attempt < spec.max_tries; ++attempt) {
    std::vector<double> rates(
        static_cast<std::size_t>(spec.num_states) * num_actions * spec.num_users);
    for (double& r : rates) {
      r = spec.rate_lo + (spec.rate_hi - spec.rate_lo) * rng.uniform01();
    }
    std::vector<std::vector<int>> next(spec.num_states, std::vector<int>(num_actions));
    for (auto& row : next) {
      for (int& s : row) s = static_cast<int>(rng.uniform_int(spec.num_states));
    }
    NetworkModel model(spec.num_users, spec.num_aps, assoc_sets, spec.num_states,
                       std::move(rates), DeterministicEvolution{std::move(next)});
    if (!check_irreducibility(model).irreducible) continue;
    if (!check_interdependence_per_state(model).interdependent) continue;
    return model;
  }
  throw InternalError("random_interdependent_instance: no suitable instance after max_tries");
}

NetworkModel planted_small_instance(std::uint64_t seed) {
  RngStream rng = derive_stream(seed, kStreamInit, 0x706c616e74);
  const int num_users = 2, num_aps = 2, num_states = 2;
  const std::int64_t num_actions = 4;
  const std::vector<std::vector<int>> assoc_sets = {{0, 1}, {0, 1}};
  const std::int64_t planted_action = 0;

  for (int attempt = 0; attempt < 50; ++attempt) {
    std::vector<double> rates(static_cast<std::size_t>(num_states) * num_actions * num_users);
    for (int s = 0; s < num_states; ++s) {
      for (std::int64_t a = 0; a < num_actions; ++a) {
        for (int i = 0; i < num_users; ++i) {
          const bool planted = s == 0 && a == planted_action;
          const double lo = planted ? 0.88 : 0.03;
          const double hi = planted ? 0.97 : 0.10;
          rates[(static_cast<std::size_t>(s) * num_actions + a) * num_users + i] =
              lo + (hi - lo) * rng.uniform01();
        }
      }
    }
    // One self-loop at the planted configuration; every other move
    // ping-pongs between the states.
    DeterministicEvolution evo;
    evo.next.assign(num_states, std::vector<int>(num_actions, 0));
    for (std::int64_t a = 0; a < num_actions; ++a) {
      evo.next[0][a] = a == planted_action ? 0 : 1;
      evo.next[1][a] = 0;
    }
    NetworkModel model(num_users, num_aps, assoc_sets, num_states, std::move(rates),
                       std::move(evo));
    if (!check_irreducibility(model).irreducible) continue;
    if (!check_interdependence_per_state(model).interdependent) continue;
    return model;
  }
  throw InternalError("planted_small_instance: generation failed");
}

// ---------------------------------------------------------------------------
// JSON document

namespace {

using nlohmann::json;

json evolution_to_json(const Evolution& evo) {
  json j;
  if (const auto* det = std::get_if<DeterministicEvolution>(&evo)) {
    j["type"] = "deterministic";
    j["next"] = det->next;
  } else if (const auto* iid = std::get_if<IidEvolution>(&evo)) {
    j["type"] = "iid";
    j["pmf"] = iid->pmf;
  } else if (const auto* cm = std::get_if<ControlledMarkovEvolution>(&evo)) {
    j["type"] = "controlled_markov";
    j["kernel"] = cm->kernel;
  } else if (const auto* ex = std::get_if<ExogenousEvolution>(&evo)) {
    j["type"] = "exogenous";
    j["transition"] = ex->transition;
  }
  return j;
}

Evolution evolution_from_json(const json& j) {
  const std::string type = j.at("type").get<std::string>();
  if (type == "deterministic") {
    return DeterministicEvolution{j.at("next").get<std::vector<std::vector<int>>>()};
  }
  if (type == "iid") {
    return IidEvolution{j.at("pmf").get<std::vector<std::vector<double>>>()};
  }
  if (type == "controlled_markov") {
    return ControlledMarkovEvolution{
        j.at("kernel").get<std::vector<std::vector<std::vector<double>>>>()};
  }
  if (type == "exogenous") {
    return ExogenousEvolution{j.at("transition").get<std::vector<std::vector<double>>>()};
  }
  throw std::invalid_argument("unknown evolution type: " + type);
}

json utility_fn_to_json(const UtilityFn& fn) {
  json j;
  if (const auto* nl = fn.as_normalized_log()) {
    j["type"] = "normalized_log";
    j["delta"] = nl->delta;
    j["u_max"] = nl->u_max;
  } else if (const auto* pw = fn.as_piecewise_linear()) {
    j["type"] = "piecewise_linear";
    j["points"] = pw->points;
  }
  return j;
}

UtilityFn utility_fn_from_json(const json& j) {
  const std::string type = j.at("type").get<std::string>();
  if (type == "normalized_log") {
    NormalizedLogUtility f;
    f.delta = j.at("delta").get<double>();
    f.u_max = j.at("u_max").get<double>();
    return UtilityFn(f);
  }
  if (type == "piecewise_linear") {
    PiecewiseLinearUtility f;
    f.points = j.at("points").get<std::vector<std::pair<double, double>>>();
    return UtilityFn(f);
  }
  throw std::invalid_argument("unknown utility type: " + type);
}

json utility_to_json(const UtilityProfile& profile) {
  // Collapse to a single tagged object when all users share one function.
  bool uniform = true;
  const json first = utility_fn_to_json(profile.user(0));
  for (int i = 1; i < profile.num_users(); ++i) {
    if (utility_fn_to_json(profile.user(i)) != first) {
      uniform = false;
      break;
    }
  }
  if (uniform) return first;
  json users = json::array();
  for (int i = 0; i < profile.num_users(); ++i) users.push_back(utility_fn_to_json(profile.user(i)));
  return json{{"type", "per_user"}, {"users", users}};
}

UtilityProfile utility_from_json(const json& j, int num_users) {
  if (j.at("type").get<std::string>() == "per_user") {
    std::vector<UtilityFn> fns;
    for (const auto& u : j.at("users")) fns.push_back(utility_fn_from_json(u));
    if (static_cast<int>(fns.size()) != num_users) {
      throw std::invalid_argument("per_user utility list length must equal num_users");
    }
    return UtilityProfile(std::move(fns));
  }
  return UtilityProfile(num_users, utility_fn_from_json(j));
}

Scenario scenario_from_json(const json& j) {
  const int num_users = j.at("num_users").get<int>();
  const int num_aps = j.at("aps").get<int>();
  const int num_states = j.at("states").get<int>();
  auto assoc_sets = j.at("assoc_sets").get<std::vector<std::vector<int>>>();
  const auto nested = j.at("rate_table").get<std::vector<std::vector<std::vector<double>>>>();
  std::vector<double> flat;
  for (const auto& per_state : nested) {
    for (const auto& per_action : per_state) {
      flat.insert(flat.end(), per_action.begin(), per_action.end());
    }
  }
  NetworkModel model(num_users, num_aps, std::move(assoc_sets), num_states, std::move(flat),
                     evolution_from_json(j.at("evolution")));
  UtilityProfile utility =
      j.contains("utility") ? utility_from_json(j.at("utility"), num_users)
                            : default_log_utility(num_users);
  return Scenario{std::move(model), std::move(utility)};
}

}  // namespace

Scenario parse_scenario(std::istream& in, const std::string& origin) {
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw std::runtime_error(origin + ": " + e.what());
  }
  try {
    return scenario_from_json(j);
  } catch (const json::exception& e) {
    throw std::runtime_error(origin + ": invalid scenario document: " + e.what());
  }
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open scenario file: " + path);
  return parse_scenario(in, path);
}

std::string scenario_to_json(const Scenario& scenario) {
  const NetworkModel& m = scenario.model;
  json j;
  j["num_users"] = m.num_users();
  j["aps"] = m.num_aps();
  j["states"] = m.num_states();
  j["assoc_sets"] = m.assoc_sets();

  std::vector<std::vector<std::vector<double>>> table(m.num_states());
  for (int s = 0; s < m.num_states(); ++s) {
    table[s].resize(static_cast<std::size_t>(m.num_actions()));
    for (std::int64_t a = 0; a < m.num_actions(); ++a) {
      const auto r = m.rates_at(s, a);
      table[s][a].assign(r.begin(), r.end());
    }
  }
  j["rate_table"] = table;
  j["evolution"] = evolution_to_json(m.evolution());
  j["utility"] = utility_to_json(scenario.utility);
  return j.dump(2);
}

void save_scenario(const Scenario& scenario, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write scenario file: " + path);
  out << scenario_to_json(scenario) << "\n";
}

}  // namespace ua
