#pragma once

#include <optional>
#include <span>
#include <vector>

namespace ua {

// Euclidean projection onto {x >= 0, sum x = radius} (sort-based).
// Output sums to radius within 1e-12 and is componentwise nonnegative.
std::vector<double> project_to_simplex(std::span<const double> x, double radius = 1.0);

// Euclidean projection onto {x >= 0, sum x <= 1}: clipping when the
// clipped point is feasible, simplex projection otherwise.
std::vector<double> project_to_subsimplex(std::span<const double> x);

// Feasibility of  columns * p >= target,  p >= 0,  sum p <= cap
// via a dense two-phase simplex (Bland's rule). `columns[c]` is the c-th
// column vector. Returns the weights on success.
std::optional<std::vector<double>> dominance_weights(
    const std::vector<std::vector<double>>& columns, std::span<const double> target,
    double cap = 1.0, double tol = 1e-9);

}  // namespace ua
