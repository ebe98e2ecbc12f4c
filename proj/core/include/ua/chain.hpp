#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "ua/alg1.hpp"
#include "ua/eps_poly.hpp"
#include "ua/model.hpp"
#include "ua/utility.hpp"

namespace ua {

struct ChainBuildOptions {
  std::int64_t max_states = 100'000;
  // Row sums are verified at these epsilons to 1e-9 during the build.
  std::vector<double> row_check_eps = {0.5, 0.1, 0.01};
};

// The exact Markov chain induced by the window-replay dynamics on
// Omega = (S x A)^k_max x {1..k_max}^N x {0,1}^N, with every transition
// probability kept as a polynomial in epsilon. Immutable once built.
class PerturbedChain {
 public:
  struct Entry {
    std::int64_t to;
    std::int32_t poly;
  };

  std::int64_t num_states() const { return num_states_; }
  int k_max() const { return k_max_; }
  double z() const { return z_; }
  const NetworkModel& model() const { return model_; }
  const UtilityProfile& utility() const { return utility_; }

  std::int64_t encode(const Alg1Snapshot& snapshot) const;
  Alg1Snapshot decode(std::int64_t index) const;

  std::span<const Entry> row(std::int64_t state) const {
    return {rows_[state].data(), rows_[state].size()};
  }
  const EpsPoly& poly(std::int32_t id) const { return pool_[id]; }

  // Probability polynomial of a one-step transition (zero if absent).
  const EpsPoly& prob(std::int64_t from, std::int64_t to) const;
  // One-step resistance; +inf when the transition is impossible.
  double resistance(std::int64_t from, std::int64_t to) const;

  // True when the window entries of `state` chain correctly under g.
  bool window_consistent(std::int64_t state) const;

 private:
  friend PerturbedChain build_chain(const NetworkModel&, const UtilityProfile&, double, int,
                                    const ChainBuildOptions&);

  PerturbedChain(NetworkModel model, UtilityProfile utility)
      : model_(std::move(model)), utility_(std::move(utility)) {}

  // The chain owns copies of its inputs; analyses stay valid independent
  // of the caller's object lifetimes.
  NetworkModel model_;
  UtilityProfile utility_;
  double z_ = 0.0;
  int k_max_ = 0;
  std::int64_t num_states_ = 0;
  std::int64_t config_count_ = 0;
  std::int64_t window_space_ = 0;
  std::int64_t k_space_ = 0;
  std::int64_t q_space_ = 0;
  std::vector<std::vector<Entry>> rows_;
  std::vector<EpsPoly> pool_;
};

// Enumerates Omega and composes every one-step probability from the
// per-user repeat/explore and persist/accept factors. z and k_max are the
// dynamics parameters; epsilon stays symbolic.
PerturbedChain build_chain(const NetworkModel& model, const UtilityProfile& utility, double z,
                           int k_max, const ChainBuildOptions& options = {});

struct RecurrentClass {
  enum class Kind { kContent, kDiscontent };
  Kind kind = Kind::kContent;
  std::vector<std::int64_t> states;
  // Content classes: the frozen window sizes, each user's average rate
  // over its own first K_i window entries, and the derived sums.
  std::vector<int> window_sizes;
  std::vector<double> window_averages;
  double utility_sum = 0.0;
  double deficit = 0.0;  // sum_i (1 - U_i(window average))
};

struct RecurrentClasses {
  std::vector<RecurrentClass> classes;
  int discontent_index = -1;
  std::vector<std::int32_t> class_of;  // per chain state; -1 for transient states

  std::vector<int> content_indices() const;
};

// Recurrent classes of the unperturbed (eps = 0) chain, verified against
// the all-content / all-discontent characterization. A recurrent class
// with mixed moods means the instance is not interdependent; that raises
// ContractError with a diagnostic.
RecurrentClasses recurrent_classes_zero(const PerturbedChain& chain);

// Minimum total one-step resistance over paths from any state of `from`
// to any state of `to` (multi-source Dijkstra).
double class_resistance(const PerturbedChain& chain, const RecurrentClasses& classes,
                        int from_class, int to_class);

// Full pairwise matrix; diagonal entries are 0.
std::vector<std::vector<double>> class_resistance_matrix(const PerturbedChain& chain,
                                                         const RecurrentClasses& classes);

// Stochastic potential per vertex of a complete weighted digraph: the
// minimum total weight over spanning in-trees rooted at that vertex.
// Computed by an optimal-branching algorithm and, for graphs of up to 8
// vertices, cross-checked against exhaustive tree enumeration.
std::vector<double> stochastic_potentials(const std::vector<std::vector<double>>& weights);

// Argmin set of the potentials (ties within `tol` are all returned).
std::vector<int> minimum_potential_set(const std::vector<double>& potentials,
                                       double tol = 1e-12);

// Min-potential recurrent classes of the chain (Dijkstra resistances +
// arborescence potentials).
std::vector<int> stochastically_stable(const PerturbedChain& chain,
                                       const RecurrentClasses& classes);

// Exact stationary distribution of the chain evaluated at a fixed epsilon
// (sparse direct solve; guarded). Residual <= 1e-10.
std::vector<double> stationary_at(const PerturbedChain& chain, double eps,
                                  std::int64_t solve_guard = 10'000);

// Probability that the chain evaluated at `eps`, started uniformly over
// `from_states`, enters `to_states` within `horizon` steps.
double first_passage_probability(const PerturbedChain& chain, double eps,
                                 std::span<const std::int64_t> from_states,
                                 std::span<const std::int64_t> to_states, int horizon);

struct ResistanceEstimate {
  double slope = 0.0;
  std::vector<double> log_eps;
  std::vector<double> log_prob;
};

// Least-squares slope of log first-passage probability against log eps,
// using exact matrix evaluations.
ResistanceEstimate matrix_resistance_estimate(const PerturbedChain& chain,
                                              const RecurrentClasses& classes, int from_class,
                                              int to_class, std::span<const double> eps_grid,
                                              int horizon);

// Same slope from simulated trajectories. Horizons are widened (up to 3
// times) if a grid point observes no transition; a still-empty grid point
// is an error.
ResistanceEstimate empirical_resistance(const PerturbedChain& chain,
                                        const RecurrentClasses& classes, int from_class,
                                        int to_class, std::span<const double> eps_grid,
                                        int horizon, int samples, std::uint64_t seed);

}  // namespace ua
