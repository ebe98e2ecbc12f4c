#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "ua/eps_poly.hpp"

TEST_CASE("monomials evaluate as coef * eps^exp") {
  const auto p = ua::EpsPoly::monomial(0.5, 3.0);
  CHECK(p.eval(0.1) == doctest::Approx(0.5e-3));
  CHECK(p.eval(0.0) == 0.0);
  CHECK(p.resistance() == 3.0);
  CHECK(p.constant_term() == 0.0);
}

TEST_CASE("repeat-branch polynomial 1 - eps^z + eps^z / A") {
  ua::EpsPoly p = ua::EpsPoly::constant(1.0);
  p += ua::EpsPoly::monomial(-1.0, 3.0);
  p += ua::EpsPoly::monomial(0.5, 3.0);
  CHECK(p.eval(0.1) == doctest::Approx(1.0 - 1e-3 + 0.5e-3));
  CHECK(p.constant_term() == 1.0);
  CHECK(p.resistance() == 0.0);
}

TEST_CASE("products add exponents and multiply coefficients") {
  const auto a = ua::EpsPoly::monomial(0.5, 1.25);
  const auto b = ua::EpsPoly::monomial(0.25, 0.5);
  const auto c = a * b;
  CHECK(c.resistance() == doctest::Approx(1.75));
  CHECK(c.eval(0.3) == doctest::Approx(0.5 * 0.25 * std::pow(0.3, 1.75)));
}

TEST_CASE("exact cancellation drops terms") {
  ua::EpsPoly p = ua::EpsPoly::constant(1.0);
  p += ua::EpsPoly::monomial(-1.0, 2.0);
  p += ua::EpsPoly::monomial(1.0, 2.0);
  CHECK(p.terms().size() == 1);
  CHECK(p.eval(0.7) == doctest::Approx(1.0));
}

TEST_CASE("equal-exponent terms merge") {
  ua::EpsPoly p = ua::EpsPoly::monomial(0.25, 1.0);
  p += ua::EpsPoly::monomial(0.25, 1.0);
  CHECK(p.terms().size() == 1);
  CHECK(p.leading_coefficient() == doctest::Approx(0.5));
}

TEST_CASE("zero polynomial carries infinite resistance") {
  const ua::EpsPoly zero;
  CHECK(zero.is_zero());
  CHECK(std::isinf(zero.resistance()));
  CHECK(zero.eval(0.5) == 0.0);
}
