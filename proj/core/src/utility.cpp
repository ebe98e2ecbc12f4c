#include "ua/utility.hpp"

#include <algorithm>
#include <stdexcept>

namespace ua {

double PiecewiseLinearUtility::value(double r) const {
  const auto& p = points;
  if (r <= p.front().first) return p.front().second;
  if (r >= p.back().first) return p.back().second;
  for (std::size_t j = 1; j < p.size(); ++j) {
    if (r <= p[j].first) {
      const double t = (r - p[j - 1].first) / (p[j].first - p[j - 1].first);
      return p[j - 1].second + t * (p[j].second - p[j - 1].second);
    }
  }
  return p.back().second;
}

double PiecewiseLinearUtility::left_derivative(double r) const {
  const auto& p = points;
  if (r <= p.front().first) return 0.0;
  for (std::size_t j = 1; j < p.size(); ++j) {
    if (r <= p[j].first) {
      return (p[j].second - p[j - 1].second) / (p[j].first - p[j - 1].first);
    }
  }
  return 0.0;
}

UtilityFn::UtilityFn(PiecewiseLinearUtility f) : fn_(std::move(f)) {
  const auto& p = std::get<PiecewiseLinearUtility>(fn_).points;
  if (p.size() < 2) throw std::invalid_argument("piecewise utility needs >= 2 points");
  for (std::size_t j = 1; j < p.size(); ++j) {
    if (p[j].first <= p[j - 1].first) {
      throw std::invalid_argument("piecewise utility breakpoints must be strictly increasing");
    }
  }
  for (const auto& [x, y] : p) {
    if (y < 0.0 || y >= 1.0) {
      throw std::invalid_argument("utility values must lie in [0, 1)");
    }
  }
}

double UtilityFn::operator()(double rate) const {
  return std::visit([rate](const auto& f) { return f.value(rate); }, fn_);
}

double UtilityFn::left_derivative(double rate) const {
  return std::visit([rate](const auto& f) { return f.left_derivative(rate); }, fn_);
}

double UtilityFn::u_max() const {
  if (const auto* f = std::get_if<NormalizedLogUtility>(&fn_)) return f->u_max;
  const auto& p = std::get<PiecewiseLinearUtility>(fn_).points;
  double m = 0.0;
  for (const auto& [x, y] : p) m = std::max(m, y);
  return m;
}

UtilityFn linear_utility(double u_max) {
  return UtilityFn(PiecewiseLinearUtility{{{0.0, 0.0}, {1.0, u_max}}});
}

}  // namespace ua
