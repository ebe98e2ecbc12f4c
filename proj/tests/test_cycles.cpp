#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <set>

#include "helpers.hpp"
#include "ua/cycles.hpp"
#include "ua/errors.hpp"

using ua::test::det_model;

namespace {

// Brute-force oracle: enumerate all sequences of distinct configuration
// nodes up to length |S x A|, keep cyclically consistent ones, dedupe by
// canonical rotation.
std::set<std::vector<std::int64_t>> brute_force_cycles(const ua::NetworkModel& model) {
  const std::int64_t num_actions = model.num_actions();
  const std::int64_t num_nodes = model.num_states() * num_actions;
  std::set<std::vector<std::int64_t>> out;
  std::vector<std::int64_t> seq;
  const auto canonical = [](std::vector<std::int64_t> v) {
    const auto min_it = std::min_element(v.begin(), v.end());
    std::rotate(v.begin(), min_it, v.end());
    return v;
  };
  const std::function<void()> extend = [&]() {
    const std::int64_t last = seq.back();
    const int succ = model.g(static_cast<int>(last / num_actions), last % num_actions);
    // the sequence closes iff g(last) lands on the first node's state
    if (seq.front() / num_actions == succ) out.insert(canonical(seq));
    if (static_cast<int>(seq.size()) == static_cast<int>(num_nodes)) return;
    for (std::int64_t a = 0; a < num_actions; ++a) {
      const std::int64_t child = static_cast<std::int64_t>(succ) * num_actions + a;
      if (std::find(seq.begin(), seq.end(), child) == seq.end()) {
        seq.push_back(child);
        extend();
        seq.pop_back();
      }
    }
  };
  for (std::int64_t v = 0; v < num_nodes; ++v) {
    seq = {v};
    extend();
  }
  return out;
}

std::set<std::vector<std::int64_t>> as_node_sets(const ua::NetworkModel& model,
                                                 const std::vector<ua::ConfigurationCycle>& cs) {
  std::set<std::vector<std::int64_t>> out;
  for (const auto& c : cs) {
    std::vector<std::int64_t> nodes;
    for (int j = 0; j < c.length(); ++j) {
      nodes.push_back(static_cast<std::int64_t>(c.states[j]) * model.num_actions() +
                      c.actions[j]);
    }
    const auto min_it = std::min_element(nodes.begin(), nodes.end());
    std::rotate(nodes.begin(), min_it, nodes.end());
    out.insert(nodes);
  }
  return out;
}

}  // namespace

TEST_CASE("single state, two actions: three basic cycles") {
  const auto model = det_model(
      1, 2, 1, [](int, std::int64_t a, int) { return a == 0 ? 0.2 : 0.8; },
      [](int, std::int64_t) { return 0; });
  const auto cycles = ua::enumerate_basic_cycles(model);
  CHECK(cycles.size() == 3);  // two self-loops and one 2-cycle
  CHECK(as_node_sets(model, cycles) == brute_force_cycles(model));
  for (const auto& c : cycles) CHECK(ua::cycle_is_consistent(model, c));
}

TEST_CASE("frozen dynamics never mix states") {
  const auto model = det_model(
      1, 2, 2, [](int, std::int64_t, int) { return 0.5; },
      [](int s, std::int64_t) { return s; });
  const auto cycles = ua::enumerate_basic_cycles(model);
  for (const auto& c : cycles) {
    const std::set<int> states(c.states.begin(), c.states.end());
    CHECK(states.size() == 1);
  }
  CHECK(as_node_sets(model, cycles) == brute_force_cycles(model));
}

TEST_CASE("enumeration matches brute force on random two-state instances") {
  for (std::uint64_t seed = 1; seed <= 12; ++seed) {
    const auto model = det_model(
        2, 2, 2, [&](int s, std::int64_t a, int i) {
          return 0.05 + 0.9 * (ua::mix_seed(seed, s * 64 + a, i) % 997) / 996.0;
        },
        [&](int s, std::int64_t a) {
          return static_cast<int>(ua::mix_seed(seed ^ 0xabc, s, static_cast<std::uint64_t>(a)) % 2);
        });
    const auto cycles = ua::enumerate_basic_cycles(model);
    CHECK(as_node_sets(model, cycles) == brute_force_cycles(model));
    for (const auto& c : cycles) {
      CHECK(ua::cycle_is_consistent(model, c));
      CHECK(c.length() <= model.num_states() * model.num_actions());
    }
  }
}

TEST_CASE("max_length caps the enumeration") {
  const auto model = det_model(
      1, 3, 1, [](int, std::int64_t, int) { return 0.5; }, [](int, std::int64_t) { return 0; });
  ua::CycleEnumerationOptions opts;
  opts.max_length = 1;
  CHECK(ua::enumerate_basic_cycles(model, opts).size() == 3);
  opts.max_length = 2;
  CHECK(ua::enumerate_basic_cycles(model, opts).size() == 6);  // 3 loops + C(3,2) pairs
}

TEST_CASE("node guard raises") {
  const auto model = det_model(
      2, 3, 2, [](int, std::int64_t, int) { return 0.5; }, [](int, std::int64_t) { return 0; });
  ua::CycleEnumerationOptions opts;
  opts.max_nodes = 4;
  CHECK_THROWS_AS((void)ua::enumerate_basic_cycles(model, opts), ua::GuardError);
}

TEST_CASE("cycle rates") {
  const auto model = det_model(
      1, 2, 1, [](int, std::int64_t a, int) { return a == 0 ? 0.2 : 0.8; },
      [](int, std::int64_t) { return 0; });
  const auto cycles = ua::enumerate_basic_cycles(model);
  for (const auto& c : cycles) {
    const auto r = ua::cycle_rate(model, c);
    if (c.length() == 1) {
      CHECK((r[0] == doctest::Approx(0.2) || r[0] == doctest::Approx(0.8)));
    } else {
      CHECK(r[0] == doctest::Approx(0.5));
    }
    // cross-module: unrolled sequence through average_rate
    const auto avg = model.average_rate_indexed(c.states[0], c.actions);
    CHECK(avg[0] == doctest::Approx(r[0]).epsilon(1e-15));
  }
}

TEST_CASE("hull membership") {
  const std::vector<std::vector<double>> rates = {{0.8, 0.1}, {0.1, 0.8}, {0.3, 0.3}};

  SUBCASE("each cycle rate is a member with unit weight") {
    for (const auto& r : rates) {
      const auto res = ua::hull_membership(r, rates);
      REQUIRE(res.member);
      double achieved0 = 0.0, achieved1 = 0.0;
      for (std::size_t c = 0; c < rates.size(); ++c) {
        achieved0 += res.weights[c] * rates[c][0];
        achieved1 += res.weights[c] * rates[c][1];
      }
      CHECK(achieved0 >= r[0] - 1e-8);
      CHECK(achieved1 >= r[1] - 1e-8);
    }
  }
  SUBCASE("midpoints are members") {
    const std::vector<double> mid = {0.45, 0.45};
    CHECK(ua::hull_membership(mid, rates).member);
  }
  SUBCASE("beyond the per-coordinate maximum is not a member") {
    const std::vector<double> outside = {0.9, 0.9};
    CHECK(!ua::hull_membership(outside, rates).member);

    // grid oracle at resolution 1/64 agrees
    bool grid_feasible = false;
    for (int i = 0; i <= 64 && !grid_feasible; ++i) {
      for (int j = 0; i + j <= 64 && !grid_feasible; ++j) {
        for (int k = 0; i + j + k <= 64 && !grid_feasible; ++k) {
          const double x = (rates[0][0] * i + rates[1][0] * j + rates[2][0] * k) / 64;
          const double y = (rates[0][1] * i + rates[1][1] * j + rates[2][1] * k) / 64;
          if (x >= 0.9 && y >= 0.9) grid_feasible = true;
        }
      }
    }
    CHECK(!grid_feasible);
  }
}

TEST_CASE("hull contains every enumerated cycle rate") {
  const auto model = det_model(
      2, 2, 2, [](int s, std::int64_t a, int i) {
        return 0.1 + 0.2 * s + 0.05 * static_cast<double>(a) + 0.1 * i;
      },
      [](int s, std::int64_t a) { return (s + static_cast<int>(a)) % 2; });
  const auto cycles = ua::enumerate_basic_cycles(model);
  const auto rates = ua::cycle_rates(model, cycles);
  for (const auto& r : rates) CHECK(ua::hull_membership(r, rates).member);
}
