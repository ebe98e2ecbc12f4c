#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "helpers.hpp"
#include "ua/chain.hpp"
#include "ua/errors.hpp"
#include "ua/scenario.hpp"

using ua::test::det_model;

namespace {

constexpr double kZ = 3.0;

// Standard small instance: 2 users, 2 APs, 2 states, K_max = 2. The seed is
// fixed to one whose chain has at least two content classes.
ua::NetworkModel standard_instance(std::uint64_t seed = 3) {
  ua::RandomInstanceSpec spec;
  return ua::random_interdependent_instance(spec, seed);
}

// Kosaraju SCC + recurrence oracle over the eps = 0 transition graph.
std::set<std::set<std::int64_t>> recurrent_sets_oracle(const ua::PerturbedChain& chain) {
  const std::int64_t n = chain.num_states();
  std::vector<std::vector<std::int64_t>> fwd(n), rev(n);
  for (std::int64_t u = 0; u < n; ++u) {
    for (const auto& e : chain.row(u)) {
      if (chain.poly(e.poly).constant_term() > 1e-14) {
        fwd[u].push_back(e.to);
        rev[e.to].push_back(u);
      }
    }
  }
  std::vector<char> seen(n, 0);
  std::vector<std::int64_t> order;
  for (std::int64_t start = 0; start < n; ++start) {
    if (seen[start]) continue;
    std::vector<std::pair<std::int64_t, std::size_t>> stack{{start, 0}};
    seen[start] = 1;
    while (!stack.empty()) {
      auto& [u, i] = stack.back();
      if (i < fwd[u].size()) {
        const std::int64_t v = fwd[u][i++];
        if (!seen[v]) {
          seen[v] = 1;
          stack.push_back({v, 0});
        }
      } else {
        order.push_back(u);
        stack.pop_back();
      }
    }
  }
  std::vector<std::int64_t> comp(n, -1);
  std::int64_t num_comp = 0;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    if (comp[*it] >= 0) continue;
    std::vector<std::int64_t> stack{*it};
    comp[*it] = num_comp;
    while (!stack.empty()) {
      const std::int64_t u = stack.back();
      stack.pop_back();
      for (const std::int64_t v : rev[u]) {
        if (comp[v] < 0) {
          comp[v] = num_comp;
          stack.push_back(v);
        }
      }
    }
    ++num_comp;
  }
  std::vector<char> exits(num_comp, 0);
  for (std::int64_t u = 0; u < n; ++u) {
    for (const std::int64_t v : fwd[u]) {
      if (comp[v] != comp[u]) exits[comp[u]] = 1;
    }
  }
  std::vector<std::set<std::int64_t>> members(num_comp);
  for (std::int64_t u = 0; u < n; ++u) members[comp[u]].insert(u);
  std::set<std::set<std::int64_t>> out;
  for (std::int64_t c = 0; c < num_comp; ++c) {
    if (!exits[c]) out.insert(members[c]);
  }
  return out;
}

}  // namespace

TEST_CASE("state space cardinality is (|S||A|)^Kmax Kmax^N 2^N") {
  const auto model = standard_instance();
  const auto chain = ua::build_chain(model, ua::default_log_utility(2), kZ, 2);
  CHECK(chain.num_states() == 1024);

  // encode/decode round-trip
  for (std::int64_t idx : {std::int64_t{0}, std::int64_t{17}, std::int64_t{513},
                           std::int64_t{1023}}) {
    CHECK(chain.encode(chain.decode(idx)) == idx);
  }
}

TEST_CASE("rows sum to one at sampled epsilons") {
  const auto model = standard_instance();
  const auto chain = ua::build_chain(model, ua::default_log_utility(2), kZ, 2);
  for (const std::int64_t u : {std::int64_t{0}, std::int64_t{111}, std::int64_t{1000}}) {
    for (const double eps : {0.5, 0.1, 0.01}) {
      double sum = 0.0;
      for (const auto& e : chain.row(u)) sum += chain.poly(e.poly).eval(eps);
      CHECK(std::abs(sum - 1.0) <= 1e-9);
    }
  }
}

TEST_CASE("regular perturbation: entries converge to their constant term") {
  const auto model = standard_instance();
  const auto chain = ua::build_chain(model, ua::default_log_utility(2), kZ, 2);
  for (std::int64_t u = 0; u < chain.num_states(); u += 97) {
    for (const auto& e : chain.row(u)) {
      const auto& p = chain.poly(e.poly);
      // the eps = 0 matrix is exactly the constant term
      CHECK(p.eval(0.0) == p.constant_term());
      // and the gap decays like eps^(smallest positive exponent)
      double min_pos = std::numeric_limits<double>::infinity();
      double mass = 0.0;
      for (const auto& [exp, coef] : p.terms()) {
        if (exp > 0.0) {
          min_pos = std::min(min_pos, exp);
          mass += std::abs(coef);
        }
      }
      for (const double eps : {1e-3, 1e-6}) {
        const double bound = std::isinf(min_pos) ? 0.0 : mass * std::pow(eps, min_pos);
        CHECK(std::abs(p.eval(eps) - p.constant_term()) <= bound + 1e-15);
      }
      CHECK(p.resistance() >= 0.0);
      CHECK(p.leading_coefficient() > 0.0);
    }
  }
}

TEST_CASE("recurrent classes match the independent SCC oracle") {
  const auto model = standard_instance();
  const auto chain = ua::build_chain(model, ua::default_log_utility(2), kZ, 2);
  const auto classes = ua::recurrent_classes_zero(chain);
  std::set<std::set<std::int64_t>> ours;
  for (const auto& rc : classes.classes) {
    ours.insert(std::set<std::int64_t>(rc.states.begin(), rc.states.end()));
  }
  CHECK(ours == recurrent_sets_oracle(chain));

  // Lemma-3 shape: every class is all-content or the single all-discontent
  REQUIRE(classes.discontent_index >= 0);
  CHECK(classes.classes[classes.discontent_index].kind ==
        ua::RecurrentClass::Kind::kDiscontent);
  CHECK(classes.content_indices().size() >= 1);
  for (const int c : classes.content_indices()) {
    for (const std::int64_t s : classes.classes[c].states) {
      const auto snap = chain.decode(s);
      for (const int q : snap.q) CHECK(q == 1);
    }
  }
}

TEST_CASE("decoupled users raise the interdependence diagnostic") {
  const auto model = det_model(
      2, 2, 1,
      [](int, std::int64_t a, int i) {
        const int own = i == 0 ? static_cast<int>(a / 2) : static_cast<int>(a % 2);
        return own == 0 ? 0.3 : 0.7;
      },
      [](int, std::int64_t) { return 0; });
  const auto chain = ua::build_chain(model, ua::default_log_utility(2), kZ, 2);
  try {
    (void)ua::recurrent_classes_zero(chain);
    FAIL("expected the mixed-mood diagnostic");
  } catch (const ua::ContractError& e) {
    CHECK(std::string(e.what()).find("interdependence") != std::string::npos);
  }
}

TEST_CASE("content classes exist when K_max reaches |S x A|") {
  // one user, two APs, single state: |S x A| = 2, K_max = 2
  const auto model = det_model(
      1, 2, 1, [](int, std::int64_t a, int) { return a == 0 ? 0.2 : 0.8; },
      [](int, std::int64_t) { return 0; });
  const auto chain = ua::build_chain(model, ua::default_log_utility(1), 2.0, 2);
  const auto classes = ua::recurrent_classes_zero(chain);
  CHECK(!classes.content_indices().empty());
}

TEST_CASE("resistance formulas on the standard instance") {
  const auto model = standard_instance();
  const auto utility = ua::default_log_utility(2);
  const auto chain = ua::build_chain(model, utility, kZ, 2);
  const auto classes = ua::recurrent_classes_zero(chain);
  const auto content = classes.content_indices();
  REQUIRE(content.size() >= 2);
  const int o = classes.discontent_index;

  for (const int b : content) {
    // exit to all-discontent costs exactly one deliberate deviation
    CHECK(ua::class_resistance(chain, classes, b, o) == kZ);
    // entry costs the utility deficit of the target class
    const double rho_in = ua::class_resistance(chain, classes, o, b);
    CHECK(std::abs(rho_in - classes.classes[b].deficit) <= 1e-12);
  }
  for (const int b1 : content) {
    for (const int b2 : content) {
      if (b1 == b2) continue;
      const double rho = ua::class_resistance(chain, classes, b1, b2);
      CHECK(rho >= kZ);
      CHECK(rho < 2 * kZ);
    }
  }
}

TEST_CASE("potentials follow the closed forms and the stable set maximizes utility") {
  const auto model = standard_instance();
  const auto utility = ua::default_log_utility(2);
  const auto chain = ua::build_chain(model, utility, kZ, 2);
  const auto classes = ua::recurrent_classes_zero(chain);
  const auto content = classes.content_indices();
  const auto rho = ua::class_resistance_matrix(chain, classes);
  const auto gamma = ua::stochastic_potentials(rho);
  const double l = static_cast<double>(content.size());

  for (const int b : content) {
    CHECK(std::abs(gamma[b] - (kZ * (l - 1) + classes.classes[b].deficit)) <= 1e-12);
  }
  CHECK(std::abs(gamma[classes.discontent_index] - kZ * l) <= 1e-12);

  const auto stable = ua::stochastically_stable(chain, classes);
  // never the discontent class
  CHECK(std::find(stable.begin(), stable.end(), classes.discontent_index) == stable.end());
  // argmin potential = argmax utility over content classes
  double best_utility = -1.0;
  for (const int b : content) best_utility = std::max(best_utility, classes.classes[b].utility_sum);
  for (const int b : stable) {
    CHECK(classes.classes[b].utility_sum == doctest::Approx(best_utility).epsilon(1e-12));
  }
}

TEST_CASE("hand-built potential substitution examples") {
  // two content classes with deficits 0.5 and 0.9 plus the discontent
  // class; z = 3. Entries follow the generic-instance resistance pattern.
  const double z = 3.0, d1 = 0.5, d2 = 0.9;
  const std::vector<std::vector<double>> rho = {
      {0.0, z + d2, z},
      {z + d1, 0.0, z},
      {d1, d2, 0.0},
  };
  const auto gamma = ua::stochastic_potentials(rho);
  CHECK(gamma[0] == doctest::Approx(z + d1));          // z (L-1) + deficit, L = 2
  CHECK(gamma[1] == doctest::Approx(z + d2));
  CHECK(gamma[2] == doctest::Approx(2 * z));           // L z
  CHECK(gamma[0] == doctest::Approx(3.5));
  CHECK(gamma[2] == doctest::Approx(6.0));
  CHECK(ua::minimum_potential_set(gamma) == std::vector<int>{0});
}

TEST_CASE("branching agrees with exhaustive enumeration on random digraphs") {
  for (std::uint64_t seed = 1; seed <= 15; ++seed) {
    ua::RngStream rng(seed);
    const int n = 5;
    std::vector<std::vector<double>> w(n, std::vector<double>(n, 0.0));
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        if (i != j) w[i][j] = 0.1 + 5.0 * rng.uniform01();
      }
    }
    // stochastic_potentials cross-checks Edmonds against the exhaustive
    // enumeration internally for graphs this small
    const auto gamma = ua::stochastic_potentials(w);
    for (const double g : gamma) CHECK(g > 0.0);
  }
}

TEST_CASE("symmetric instances report the full tie set") {
  const double z = 3.0, d = 0.4;
  const std::vector<std::vector<double>> rho = {
      {0.0, z + d, z},
      {z + d, 0.0, z},
      {d, d, 0.0},
  };
  const auto gamma = ua::stochastic_potentials(rho);
  CHECK(ua::minimum_potential_set(gamma) == std::vector<int>{0, 1});
}

TEST_CASE("exact stationary distribution at fixed eps") {
  const auto model = ua::planted_small_instance(1);
  const auto utility = ua::default_log_utility(2);
  const auto chain = ua::build_chain(model, utility, kZ, 2);
  const auto classes = ua::recurrent_classes_zero(chain);
  const auto pi = ua::stationary_at(chain, 0.2);
  double total = 0.0;
  for (std::int64_t s = 0; s < chain.num_states(); ++s) {
    CHECK(pi[s] >= -1e-12);
    total += pi[s];
    if (chain.window_consistent(s)) {
      CHECK(pi[s] > 0.0);  // every consistent state is visited at eps > 0
    }
  }
  CHECK(std::abs(total - 1.0) <= 1e-12);

  // mass on the stable classes grows as eps shrinks and clears 0.5
  const auto stable = ua::stochastically_stable(chain, classes);
  const auto mass_of = [&](const std::vector<double>& dist) {
    double mass = 0.0;
    for (const int b : stable) {
      for (const std::int64_t s : classes.classes[b].states) mass += dist[s];
    }
    return mass;
  };
  const double m1 = mass_of(ua::stationary_at(chain, 0.2));
  const double m2 = mass_of(ua::stationary_at(chain, 0.1));
  const double m3 = mass_of(ua::stationary_at(chain, 0.05));
  CHECK(m1 < m2);
  CHECK(m2 < m3);
  CHECK(m3 > 0.5);

  // solve guard
  CHECK_THROWS_AS((void)ua::stationary_at(chain, 0.2, 100), ua::GuardError);
}

TEST_CASE("resistance estimates from first-passage slopes") {
  // Low utilities keep the rejection factors (1 - eps^(1-U)) near one at
  // samplable epsilons, so the slopes are clean; high-utility instances
  // need far smaller epsilons than simulation can see.
  const auto model = standard_instance();
  const ua::UtilityProfile utility(2, ua::linear_utility(0.05));
  const double z = 2.2;
  const auto chain = ua::build_chain(model, utility, z, 2);
  const auto classes = ua::recurrent_classes_zero(chain);
  const int b = classes.content_indices().front();
  const int o = classes.discontent_index;

  SUBCASE("degenerate estimate for identical classes") {
    const std::vector<double> grid = {0.1, 0.2, 0.3};
    const auto est = ua::empirical_resistance(chain, classes, b, b, grid, 4, 100, 1);
    CHECK(est.slope == 0.0);
  }
  SUBCASE("content to discontent: slope close to z") {
    // in the symbolic regime the exact slope pins z to four digits
    const std::vector<double> tiny = {1e-6, 1e-5, 1e-4};
    const auto symbolic = ua::matrix_resistance_estimate(chain, classes, b, o, tiny, 3);
    CHECK(symbolic.slope == doctest::Approx(z).epsilon(1e-3));

    const std::vector<double> grid = {0.03, 0.06, 0.12};
    const auto exact = ua::matrix_resistance_estimate(chain, classes, b, o, grid, 3);
    CHECK(std::abs(exact.slope - z) <= 0.15 * z);
    const auto sim = ua::empirical_resistance(chain, classes, b, o, grid, 3, 200000, 7);
    CHECK(std::abs(sim.slope - z) <= 0.15 * z);
    CHECK(std::abs(sim.slope - exact.slope) <= 0.1 * z);
  }
  SUBCASE("discontent to content: slope close to the deficit") {
    const double d = classes.classes[b].deficit;
    const std::vector<double> tiny = {1e-6, 1e-5, 1e-4};
    const auto symbolic = ua::matrix_resistance_estimate(chain, classes, o, b, tiny, 25);
    CHECK(symbolic.slope == doctest::Approx(d).epsilon(1e-3));

    const std::vector<double> grid = {0.01, 0.02, 0.04};
    const auto exact = ua::matrix_resistance_estimate(chain, classes, o, b, grid, 25);
    CHECK(std::abs(exact.slope - d) <= 0.15 * std::max(1.0, d));
    const auto sim = ua::empirical_resistance(chain, classes, o, b, grid, 25, 300000, 9);
    CHECK(std::abs(sim.slope - d) <= 0.15 * std::max(1.0, d));
    CHECK(std::abs(sim.slope - exact.slope) <= 0.1 * std::max(1.0, d));
  }
}

TEST_CASE("build guard") {
  const auto model = standard_instance();
  ua::ChainBuildOptions opts;
  opts.max_states = 100;
  CHECK_THROWS_AS((void)ua::build_chain(model, ua::default_log_utility(2), kZ, 2, opts),
                  ua::GuardError);
}
