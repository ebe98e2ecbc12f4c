#include "ua/eps_poly.hpp"

#include <algorithm>
#include <cmath>

namespace ua {

EpsPoly EpsPoly::monomial(double coef, double exponent) {
  EpsPoly p;
  if (coef != 0.0) p.terms_.emplace_back(exponent, coef);
  return p;
}

void EpsPoly::canonicalize() {
  std::sort(terms_.begin(), terms_.end());
  std::vector<std::pair<double, double>> merged;
  for (const auto& [e, c] : terms_) {
    if (!merged.empty() && e - merged.back().first <= kEpsPolyExponentMergeTol) {
      merged.back().second += c;
    } else {
      merged.emplace_back(e, c);
    }
  }
  merged.erase(std::remove_if(merged.begin(), merged.end(),
                              [](const auto& t) {
                                return std::abs(t.second) <= kEpsPolyCoefDropTol;
                              }),
               merged.end());
  terms_ = std::move(merged);
}

EpsPoly& EpsPoly::operator+=(const EpsPoly& other) {
  terms_.insert(terms_.end(), other.terms_.begin(), other.terms_.end());
  canonicalize();
  return *this;
}

EpsPoly EpsPoly::operator*(const EpsPoly& other) const {
  EpsPoly out;
  out.terms_.reserve(terms_.size() * other.terms_.size());
  for (const auto& [e1, c1] : terms_) {
    for (const auto& [e2, c2] : other.terms_) {
      out.terms_.emplace_back(e1 + e2, c1 * c2);
    }
  }
  out.canonicalize();
  return out;
}

double EpsPoly::eval(double eps) const {
  double v = 0.0;
  for (const auto& [e, c] : terms_) {
    if (e == 0.0) {
      v += c;
    } else if (eps > 0.0) {
      v += c * std::pow(eps, e);
    }
  }
  return v;
}

double EpsPoly::constant_term() const {
  return terms_.empty() || terms_.front().first > kEpsPolyExponentMergeTol
             ? 0.0
             : terms_.front().second;
}

double EpsPoly::resistance() const {
  return terms_.empty() ? kInfiniteResistance : terms_.front().first;
}

double EpsPoly::leading_coefficient() const {
  return terms_.empty() ? 0.0 : terms_.front().second;
}

}  // namespace ua
