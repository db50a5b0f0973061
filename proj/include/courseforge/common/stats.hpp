#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <vector>

namespace courseforge {

// Nearest-rank percentile: the smallest value with at least p% of samples at
// or below it. Empty input yields 0.
template <typename T>
T percentile_nearest_rank(std::vector<T> values, double p) {
  if (values.empty()) return T{};
  std::sort(values.begin(), values.end());
  auto rank = static_cast<std::size_t>(std::ceil(p / 100.0 * static_cast<double>(values.size())));
  rank = std::clamp<std::size_t>(rank, 1, values.size());
  return values[rank - 1];
}

template <typename T>
double mean_of(const std::vector<T>& values) {
  if (values.empty()) return 0.0;
  long double sum = 0;
  for (const auto& v : values) sum += static_cast<long double>(v);
  return static_cast<double>(sum / static_cast<long double>(values.size()));
}

}  // namespace courseforge
