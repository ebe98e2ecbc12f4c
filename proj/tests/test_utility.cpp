#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "ua/utility.hpp"

TEST_CASE("normalized log hits both endpoints and stays monotone") {
  ua::NormalizedLogUtility f;  // delta 0.01, u_max 0.9
  CHECK(f.value(0.0) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(f.value(1.0) == doctest::Approx(0.9).epsilon(1e-12));
  double prev = -1.0;
  for (int i = 0; i <= 1000; ++i) {
    const double u = f.value(i / 1000.0);
    CHECK(u > prev);
    CHECK(u >= 0.0);
    CHECK(u <= 0.9 + 1e-12);
    prev = u;
  }
}

TEST_CASE("continuity via dense sampling against the Lipschitz bound") {
  // On [0, 1] the slope of the normalized log is at most U'(0).
  ua::NormalizedLogUtility f;
  const double lipschitz = f.left_derivative(0.0);
  const int n = 20000;
  const double step = 1.0 / n;
  for (int i = 1; i <= n; ++i) {
    const double jump = std::abs(f.value(i * step) - f.value((i - 1) * step));
    CHECK(jump <= lipschitz * step * (1.0 + 1e-9));
  }
}

TEST_CASE("piecewise linear interpolation and left derivative") {
  ua::PiecewiseLinearUtility f{{{0.0, 0.0}, {0.5, 0.8}, {1.0, 0.9}}};
  CHECK(f.value(0.25) == doctest::Approx(0.4));
  CHECK(f.value(0.75) == doctest::Approx(0.85));
  CHECK(f.left_derivative(0.3) == doctest::Approx(1.6));
  CHECK(f.left_derivative(0.5) == doctest::Approx(1.6));   // left side of the kink
  CHECK(f.left_derivative(0.75) == doctest::Approx(0.2));
}

TEST_CASE("utility profile bounds") {
  const auto profile = ua::default_log_utility(3);
  for (int i = 0; i < 3; ++i) {
    for (double r : {0.0, 0.3, 1.0}) {
      const double u = profile.value(i, r);
      CHECK(u >= 0.0);
      CHECK(u <= 0.9 + 1e-12);
    }
  }
  const std::vector<double> rates = {0.2, 0.4, 0.9};
  double expect = 0.0;
  for (int i = 0; i < 3; ++i) expect += profile.value(i, rates[i]);
  CHECK(profile.sum_value(rates) == doctest::Approx(expect));
}

TEST_CASE("invalid piecewise tables are rejected") {
  CHECK_THROWS(ua::UtilityFn(ua::PiecewiseLinearUtility{{{0.0, 0.0}}}));
  CHECK_THROWS(ua::UtilityFn(ua::PiecewiseLinearUtility{{{0.0, 0.0}, {0.0, 0.5}}}));
  CHECK_THROWS(ua::UtilityFn(ua::PiecewiseLinearUtility{{{0.0, 0.0}, {1.0, 1.0}}}));
}

TEST_CASE("linear utility helper") {
  const auto u = ua::linear_utility(0.9);
  CHECK(u(0.0) == doctest::Approx(0.0));
  CHECK(u(0.5) == doctest::Approx(0.45));
  CHECK(u(1.0) == doctest::Approx(0.9));
}
