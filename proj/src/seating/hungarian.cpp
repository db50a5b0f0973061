#include "courseforge/seating/hungarian.hpp"

#include <limits>
#include <stdexcept>

namespace courseforge::seating {

// Shortest augmenting paths with row/column potentials, O(rows^2 * cols).
std::vector<int> min_cost_assignment(const std::vector<std::int64_t>& cost, int rows, int cols) {
  if (rows > cols) throw std::invalid_argument("min_cost_assignment: rows > cols");
  const std::int64_t inf = std::numeric_limits<std::int64_t>::max() / 4;
  auto a = [&](int i, int j) { return cost[static_cast<std::size_t>((i - 1) * cols + (j - 1))]; };

  std::vector<std::int64_t> u(rows + 1, 0), v(cols + 1, 0);
  std::vector<int> p(cols + 1, 0), way(cols + 1, 0);
  std::vector<std::int64_t> minv(cols + 1);
  std::vector<char> used(cols + 1);

  for (int i = 1; i <= rows; ++i) {
    p[0] = i;
    int j0 = 0;
    std::fill(minv.begin(), minv.end(), inf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[j0] = 1;
      int i0 = p[j0], j1 = 0;
      std::int64_t delta = inf;
      for (int j = 1; j <= cols; ++j) {
        if (used[j]) continue;
        std::int64_t cur = a(i0, j) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= cols; ++j) {
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
      int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0);
  }

  std::vector<int> result(rows, -1);
  for (int j = 1; j <= cols; ++j) {
    if (p[j] != 0) result[p[j] - 1] = j - 1;
  }
  return result;
}

}  // namespace courseforge::seating
