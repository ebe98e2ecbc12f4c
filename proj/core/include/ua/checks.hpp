#pragma once

#include <optional>
#include <vector>

#include "ua/model.hpp"

namespace ua {

struct IrreducibilityWitness {
  int from = -1;  // state that cannot reach `to` under any action sequence
  int to = -1;
};

struct IrreducibilityResult {
  bool irreducible = false;
  std::optional<IrreducibilityWitness> witness;
};

// Strong connectivity of the state graph {s -> g(s, a) : a in A}.
// Deterministic evolution only.
IrreducibilityResult check_irreducibility(const NetworkModel& model);

struct InterdependenceWitness {
  int state = -1;           // -1 for the expected-rate variant
  std::vector<int> subset;  // user indices forming N'
  std::vector<int> assoc;   // association vector no outside user can feel a deviation of
};

struct InterdependenceResult {
  bool interdependent = false;
  std::optional<InterdependenceWitness> witness;
};

// Per-state variant: for every state s, every proper nonempty subset N' of
// users and every joint association a, some user j outside N' sees a rate
// change under some deviation that alters only the N' coordinates.
// The enumeration is exponential in N; guarded at N <= 12.
InterdependenceResult check_interdependence_per_state(const NetworkModel& model);

// Expected-rate variant for IidPerAction evolution: the same quantifier
// structure over E_{mu(.|a)}[r_j(s, a)] instead of per-state rates.
InterdependenceResult check_interdependence_expected(const NetworkModel& model);

// Dispatches on the evolution variant: expected-rate for IidPerAction,
// per-state otherwise.
InterdependenceResult check_interdependence(const NetworkModel& model);

}  // namespace ua
