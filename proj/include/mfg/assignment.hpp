#pragma once

#include <cstddef>
#include <limits>
#include <vector>

namespace mfg {

/// Minimum-cost perfect matching on an n x n cost given by cost(row, col),
/// shortest augmenting paths with dual potentials (Hungarian method).
/// Returns the optimal total; match[row] receives the assigned column.
template <class Cost>
double solve_assignment(std::size_t n, Cost&& cost, std::vector<std::size_t>* match = nullptr) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), minv(n + 1);
  std::vector<std::size_t> p(n + 1, 0), way(n + 1, 0);
  std::vector<char> used(n + 1);
  for (std::size_t i = 1; i <= n; ++i) {
    p[0] = i;
    std::size_t j0 = 0;
    std::fill(minv.begin(), minv.end(), inf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[j0] = 1;
      const std::size_t i0 = p[j0];
      double delta = inf;
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
  double total = 0.0;
  if (match) match->assign(n, 0);
  for (std::size_t j = 1; j <= n; ++j) {
    total += cost(p[j] - 1, j - 1);
    if (match) (*match)[p[j] - 1] = j - 1;
  }
  return total;
}

}  // namespace mfg
