// Copyright 2026 The spatrwd Authors.
// SPDX-License-Identifier: Apache-2.0

#include "spatrwd/binding.hpp"

#include <algorithm>
#include <limits>

namespace spatrwd {

// Hungarian algorithm (potentials form) on the square matrix padded with
// zero-score dummies, minimizing negated scores.
Assignment MaxWeightAssignment(const std::vector<std::vector<double>>& scores) {
  const std::size_t rows = scores.size();
  std::size_t cols = 0;
  for (const auto& r : scores) cols = std::max(cols, r.size());
  Assignment result(rows);
  if (rows == 0 || cols == 0) return result;

  const std::size_t n = std::max(rows, cols);
  auto cost = [&](std::size_t i, std::size_t j) -> double {
    if (i < rows && j < scores[i].size()) return -scores[i][j];
    return 0.0;
  };
  constexpr double kInf = std::numeric_limits<double>::infinity();
  // 1-based arrays; p[j] is the row matched to column j.
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<std::size_t> p(n + 1, 0), way(n + 1, 0);
  for (std::size_t i = 1; i <= n; ++i) {
    p[0] = i;
    std::size_t j0 = 0;
    std::vector<double> minv(n + 1, kInf);
    std::vector<bool> used(n + 1, false);
    do {
      used[j0] = true;
      const std::size_t i0 = p[j0];
      double delta = kInf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  for (std::size_t j = 1; j <= n; ++j) {
    const std::size_t i = p[j] - 1;
    if (i < rows && j - 1 < scores[i].size()) result[i] = j - 1;
  }
  return result;
}

double AssignmentValue(const std::vector<std::vector<double>>& scores, const Assignment& assignment) {
  double total = 0.0;
  for (std::size_t i = 0; i < assignment.size(); ++i) {
    if (assignment[i]) total += scores[i][*assignment[i]];
  }
  return total;
}

}  // namespace spatrwd
