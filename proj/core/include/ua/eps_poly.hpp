#pragma once

#include <limits>
#include <utility>
#include <vector>

namespace ua {

// Transition probability as a finite sum of coef * eps^exponent terms with
// real exponents (a generalized polynomial). The resistance of a positive
// transition is the smallest exponent carrying a nonzero coefficient.
class EpsPoly {
 public:
  EpsPoly() = default;

  static EpsPoly constant(double c) { return monomial(c, 0.0); }
  static EpsPoly monomial(double coef, double exponent);

  EpsPoly& operator+=(const EpsPoly& other);
  EpsPoly operator*(const EpsPoly& other) const;
  friend EpsPoly operator+(EpsPoly lhs, const EpsPoly& rhs) {
    lhs += rhs;
    return lhs;
  }

  double eval(double eps) const;
  double constant_term() const;  // value at eps = 0

  // Smallest exponent with a nonzero coefficient; +inf for the zero
  // polynomial. The leading coefficient of a probability is positive.
  double resistance() const;
  double leading_coefficient() const;

  bool is_zero() const { return terms_.empty(); }
  const std::vector<std::pair<double, double>>& terms() const { return terms_; }

  bool operator==(const EpsPoly&) const = default;
  bool operator<(const EpsPoly& other) const { return terms_ < other.terms_; }

 private:
  void canonicalize();

  // (exponent, coefficient), ascending exponent, exponents distinct beyond
  // the merge tolerance, no vanishing coefficients.
  std::vector<std::pair<double, double>> terms_;
};

inline constexpr double kEpsPolyExponentMergeTol = 1e-12;
inline constexpr double kEpsPolyCoefDropTol = 1e-14;
inline constexpr double kInfiniteResistance = std::numeric_limits<double>::infinity();

}  // namespace ua
