#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "ua/model.hpp"
#include "ua/utility.hpp"

namespace ua {

struct Scenario {
  NetworkModel model;
  UtilityProfile utility;
};

struct Point {
  double x = 0.0;
  double y = 0.0;
};

enum class WifiEvolutionKind {
  // Orthogonal channel goes to the AP with the most associated users,
  // ties broken by lowest AP index.
  kDeterministicMaxLoad,
  // Channel allocation drawn uniformly at random each slot, independent of
  // associations (and unknown to the users before acting).
  kUniformIid,
  // Same uniform allocation expressed as an action-independent ergodic
  // chain, for the known-state algorithm.
  kUniformExogenous,
};

// Synthetic WiFi-style scenario: M APs, N users, `num_channels` orthogonal
// channels and one state per AP (state s = AP s holds a channel alone while
// the remaining APs share the rest).
//
// The rate model is deliberately simple and fully documented here:
//   solo(d)   step function of the user-AP distance (see wifi_solo_rate),
//   airtime   users associated with one AP share it equally,
//   channel   the orthogonal-channel AP keeps factor 1, every other AP gets
//             (num_channels - 1) / (M - 1).
// A user may associate with every AP within `reach` meters; if none is in
// reach, the closest AP is used.
Scenario make_wifi_scenario(int num_users, const std::vector<Point>& user_positions,
                            const std::vector<Point>& ap_positions, int num_channels,
                            WifiEvolutionKind evolution = WifiEvolutionKind::kDeterministicMaxLoad,
                            double reach = 40.0);

// Distance-stepped solo PHY rate, normalized to (0, 1].
double wifi_solo_rate(double distance);

// The 3-AP / 5-user layout used throughout the test-suite: APs at the
// vertices of an equilateral triangle of side 25 m, two channels, three
// states.
Scenario standard_wifi_scenario(WifiEvolutionKind evolution);

// Small random instances for the exact analyzers: iid uniform rate entries
// (almost surely all distinct) and a random total transition map, rejection
// sampled until the instance is irreducible and interdependent.
struct RandomInstanceSpec {
  int num_users = 2;
  int num_aps = 2;
  int num_states = 2;
  double rate_lo = 0.05;
  double rate_hi = 0.95;
  int max_tries = 200;
};
NetworkModel random_interdependent_instance(const RandomInstanceSpec& spec, std::uint64_t seed);

// The standard 2-user / 2-AP / 2-state analysis fixture: a single
// high-rate self-loop configuration (the planted optimum) plus low-rate
// two-slot cycles, so the stationary mass visibly concentrates on the
// stochastically stable classes at moderate epsilon. Rates stay pairwise
// distinct; the instance is irreducible and interdependent.
NetworkModel planted_small_instance(std::uint64_t seed);

// JSON scenario document. Key names are part of the file contract:
// num_users, aps, assoc_sets, states, rate_table, evolution, utility
// (see docs/scenario.schema.json).
Scenario load_scenario(const std::string& path);
Scenario parse_scenario(std::istream& in, const std::string& origin);
std::string scenario_to_json(const Scenario& scenario);
void save_scenario(const Scenario& scenario, const std::string& path);

}  // namespace ua
