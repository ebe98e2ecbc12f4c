#pragma once

#include <cmath>
#include <span>
#include <utility>
#include <variant>
#include <vector>

namespace ua {

// Bounded proportional-fairness utility on [0, 1]:
//   U(r) = u_max * (log(delta + r) - log(delta)) / (log(1 + delta) - log(delta))
// so that U(0) = 0, U(1) = u_max and the log shape is preserved.
struct NormalizedLogUtility {
  double delta = 0.01;
  double u_max = 0.9;

  double value(double r) const {
    return u_max * (std::log(delta + r) - std::log(delta)) / scale();
  }
  double left_derivative(double r) const { return u_max / (scale() * (delta + r)); }
  double scale() const { return std::log(1.0 + delta) - std::log(delta); }
};

// Piecewise-linear utility given by breakpoints (r_j, u_j), r_0 = 0, r_last = 1.
struct PiecewiseLinearUtility {
  std::vector<std::pair<double, double>> points;

  double value(double r) const;
  double left_derivative(double r) const;
};

class UtilityFn {
 public:
  UtilityFn() : fn_(NormalizedLogUtility{}) {}
  explicit UtilityFn(NormalizedLogUtility f) : fn_(f) {}
  explicit UtilityFn(PiecewiseLinearUtility f);

  double operator()(double rate) const;
  // Left derivative; the deterministic subgradient choice at kinks.
  double left_derivative(double rate) const;
  double u_max() const;

  bool is_normalized_log() const { return std::holds_alternative<NormalizedLogUtility>(fn_); }
  const NormalizedLogUtility* as_normalized_log() const {
    return std::get_if<NormalizedLogUtility>(&fn_);
  }
  const PiecewiseLinearUtility* as_piecewise_linear() const {
    return std::get_if<PiecewiseLinearUtility>(&fn_);
  }

 private:
  std::variant<NormalizedLogUtility, PiecewiseLinearUtility> fn_;
};

// Per-user utilities. 0 <= U_i(r) <= u_max < 1 for r in [0, 1].
class UtilityProfile {
 public:
  UtilityProfile() = default;
  // Same function for every user.
  UtilityProfile(int num_users, UtilityFn fn) : fns_(num_users, std::move(fn)) {}
  explicit UtilityProfile(std::vector<UtilityFn> fns) : fns_(std::move(fns)) {}

  int num_users() const { return static_cast<int>(fns_.size()); }
  const UtilityFn& user(int i) const { return fns_[i]; }

  double value(int user, double rate) const { return fns_[user](rate); }
  double sum_value(std::span<const double> rates) const {
    double s = 0.0;
    for (std::size_t i = 0; i < rates.size(); ++i) s += fns_[i](rates[i]);
    return s;
  }

 private:
  std::vector<UtilityFn> fns_;
};

inline UtilityProfile default_log_utility(int num_users) {
  return UtilityProfile(num_users, UtilityFn(NormalizedLogUtility{}));
}

// Linear utility U(r) = u_max * r as a two-point piecewise table.
UtilityFn linear_utility(double u_max);

}  // namespace ua
