#pragma once

#include <cstddef>
#include <limits>
#include <vector>

namespace xamr {

// Maximum-weight one-to-one assignment on a dense rows x cols matrix
// (shortest augmenting path with potentials, O(r^2 c) for r <= c).
// Returns, for every row, its column or -1 when the row stays unmatched.
template <typename T = double>
std::vector<int> max_weight_assignment(const std::vector<std::vector<T>>& weight) {
  const std::size_t rows = weight.size();
  const std::size_t cols = rows ? weight[0].size() : 0;
  if (rows == 0 || cols == 0) return std::vector<int>(rows, -1);

  // Solve with the smaller side as rows.
  const bool transpose = rows > cols;
  const std::size_t n = transpose ? cols : rows;
  const std::size_t m = transpose ? rows : cols;
  auto cost = [&](std::size_t i, std::size_t j) -> T {
    return transpose ? -weight[j - 1][i - 1] : -weight[i - 1][j - 1];
  };

  const T inf = std::numeric_limits<T>::max();
  std::vector<T> u(n + 1, T{}), v(m + 1, T{});
  std::vector<std::size_t> p(m + 1, 0), way(m + 1, 0);
  for (std::size_t i = 1; i <= n; ++i) {
    p[0] = i;
    std::size_t j0 = 0;
    std::vector<T> minv(m + 1, inf);
    std::vector<bool> used(m + 1, false);
    do {
      used[j0] = true;
      const std::size_t i0 = p[j0];
      T delta = inf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= m; ++j) {
        if (used[j]) continue;
        const T cur = cost(i0, j) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= m; ++j) {
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

  std::vector<int> assignment(rows, -1);
  for (std::size_t j = 1; j <= m; ++j) {
    if (p[j] == 0) continue;
    if (transpose)
      assignment[j - 1] = static_cast<int>(p[j] - 1);
    else
      assignment[p[j] - 1] = static_cast<int>(j - 1);
  }
  return assignment;
}

}  // namespace xamr
