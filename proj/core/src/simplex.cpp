#include "ua/simplex.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ua/errors.hpp"

namespace ua {

std::vector<double> project_to_simplex(std::span<const double> x, double radius) {
  std::vector<double> sorted(x.begin(), x.end());
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  double cumulative = 0.0;
  double theta = (std::accumulate(sorted.begin(), sorted.end(), 0.0) - radius) /
                 static_cast<double>(sorted.size());
  double running = 0.0;
  for (std::size_t k = 0; k < sorted.size(); ++k) {
    running += sorted[k];
    const double t = (running - radius) / static_cast<double>(k + 1);
    if (k + 1 == sorted.size() || sorted[k + 1] <= t) {
      theta = t;
      cumulative = running;
      break;
    }
  }
  (void)cumulative;
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = std::max(0.0, x[i] - theta);
  return out;
}

std::vector<double> project_to_subsimplex(std::span<const double> x) {
  std::vector<double> clipped(x.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    clipped[i] = std::max(0.0, x[i]);
    sum += clipped[i];
  }
  if (sum <= 1.0) return clipped;
  return project_to_simplex(x, 1.0);
}

namespace {

constexpr double kPivotTol = 1e-11;

// Dense two-phase (phase-1 only) simplex for A x = b, x >= 0 with b >= 0.
// Returns the basic feasible x if one exists within `tol` of feasibility.
std::optional<std::vector<double>> phase1(std::vector<std::vector<double>> a,
                                          std::vector<double> b, int num_vars, double tol) {
  const int m = static_cast<int>(a.size());
  const int total = num_vars + m;  // artificials appended
  for (int i = 0; i < m; ++i) {
    a[i].resize(total, 0.0);
    a[i][num_vars + i] = 1.0;
  }
  std::vector<int> basis(m);
  for (int i = 0; i < m; ++i) basis[i] = num_vars + i;

  // Phase-1 objective row: minimize sum of artificials.
  std::vector<double> obj(total, 0.0);
  double obj_value = 0.0;
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < total; ++j) obj[j] -= a[i][j];
    obj_value -= b[i];
  }
  for (int i = 0; i < m; ++i) obj[num_vars + i] += 1.0;

  const int max_iters = 20000 + 200 * total;
  for (int iter = 0; iter < max_iters; ++iter) {
    // Bland's rule: smallest improving column.
    int enter = -1;
    for (int j = 0; j < total; ++j) {
      if (obj[j] < -kPivotTol) {
        enter = j;
        break;
      }
    }
    if (enter < 0) break;
    int leave = -1;
    double best_ratio = 0.0;
    for (int i = 0; i < m; ++i) {
      if (a[i][enter] > kPivotTol) {
        const double ratio = b[i] / a[i][enter];
        if (leave < 0 || ratio < best_ratio - kPivotTol ||
            (ratio < best_ratio + kPivotTol && basis[i] < basis[leave])) {
          leave = i;
          best_ratio = ratio;
        }
      }
    }
    if (leave < 0) return std::nullopt;  // unbounded phase-1 cannot happen; treat as infeasible
    const double piv = a[leave][enter];
    for (int j = 0; j < total; ++j) a[leave][j] /= piv;
    b[leave] /= piv;
    for (int i = 0; i < m; ++i) {
      if (i == leave || std::abs(a[i][enter]) < 1e-300) continue;
      const double f = a[i][enter];
      for (int j = 0; j < total; ++j) a[i][j] -= f * a[leave][j];
      b[i] -= f * b[leave];
    }
    const double f = obj[enter];
    if (std::abs(f) > 0.0) {
      for (int j = 0; j < total; ++j) obj[j] -= f * a[leave][j];
      obj_value -= f * b[leave];
    }
    basis[leave] = enter;
  }

  double infeas = 0.0;
  for (int i = 0; i < m; ++i) {
    if (basis[i] >= num_vars) infeas += b[i];
  }
  if (infeas > tol) return std::nullopt;

  std::vector<double> x(num_vars, 0.0);
  for (int i = 0; i < m; ++i) {
    if (basis[i] < num_vars) x[basis[i]] = b[i];
  }
  return x;
}

}  // namespace

std::optional<std::vector<double>> dominance_weights(
    const std::vector<std::vector<double>>& columns, std::span<const double> target,
    double cap, double tol) {
  const int num_cols = static_cast<int>(columns.size());
  const int dim = static_cast<int>(target.size());
  if (num_cols == 0) {
    for (double t : target) {
      if (t > tol) return std::nullopt;
    }
    return std::vector<double>{};
  }
  // Rows: dim dominance constraints (>= target, surplus variables) and the
  // capacity constraint (slack variable).
  const int m = dim + 1;
  const int num_vars = num_cols + dim + 1;
  std::vector<std::vector<double>> a(m, std::vector<double>(num_vars, 0.0));
  std::vector<double> b(m, 0.0);
  for (int i = 0; i < dim; ++i) {
    for (int c = 0; c < num_cols; ++c) a[i][c] = columns[c][i];
    a[i][num_cols + i] = -1.0;
    b[i] = target[i];
    if (b[i] < 0.0) {
      for (double& v : a[i]) v = -v;
      b[i] = -b[i];
    }
  }
  for (int c = 0; c < num_cols; ++c) a[dim][c] = 1.0;
  a[dim][num_cols + dim] = 1.0;
  b[dim] = cap;

  auto x = phase1(std::move(a), std::move(b), num_vars, tol);
  if (!x) return std::nullopt;
  x->resize(num_cols);
  return x;
}

}  // namespace ua
