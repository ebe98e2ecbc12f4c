#pragma once

#include <cstdint>
#include <vector>

#include "ua/model.hpp"

namespace ua {

using TransitionMatrix = std::vector<std::vector<double>>;

// Is the positive-entry graph of the stochastic matrix strongly connected,
// and if so, is its period 1?
bool chain_is_irreducible(const TransitionMatrix& p);
int chain_period(const TransitionMatrix& p);  // requires irreducible

// Unique stationary distribution of an irreducible aperiodic stochastic
// matrix by direct linear solve; residual ||pi P - pi||_inf <= 1e-10.
// Throws ContractError when the chain is reducible or periodic.
std::vector<double> stationary_distribution(const TransitionMatrix& p);

// Second largest eigenvalue modulus of a stochastic matrix.
double slem(const TransitionMatrix& p);

// Joint stationary control: per user, a total map from states to an AP in
// that user's association set. h[user][state] = AP id.
struct StationaryControl {
  std::vector<std::vector<int>> h;

  bool operator==(const StationaryControl&) const = default;
};

// Number of per-user maps |A_i|^|S| and the joint product. Guarded.
std::int64_t control_space_size(const NetworkModel& model);

// All joint stationary controls; throws GuardError beyond `max_controls`.
std::vector<StationaryControl> enumerate_controls(const NetworkModel& model,
                                                  std::int64_t max_controls = 200'000);

// The state chain induced by pinning the joint control: row s is
// kernel[s][a = h(s)].
TransitionMatrix induced_kernel(const NetworkModel& model, const StationaryControl& control);

// Expected per-user rate under mu(.|a) for a fixed joint action (iid
// evolution): an exact finite sum.
std::vector<double> expected_payoff_iid(const NetworkModel& model, std::int64_t action);

// Expected stationary per-user payoff of a joint control (controlled
// Markov evolution): sum_s mu(s, h) r(s, h(s)).
std::vector<double> expected_payoff_control(const NetworkModel& model,
                                            const StationaryControl& control);

// Time-average state distribution of the exogenous variant (stationary
// distribution of its transition matrix).
std::vector<double> exogenous_time_average(const NetworkModel& model);

}  // namespace ua
