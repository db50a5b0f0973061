#pragma once

#include <cstdint>
#include <optional>
#include <vector>

namespace cftest {

struct OracleDecision {
  bool allowed;
  std::int64_t retry_after;
};

// Reference fixed-window limiter, written without looking at the library:
// a window opens at an allowed attempt made when no window is open, and
// closes `window` seconds later. Denied attempts change nothing.
inline std::vector<OracleDecision> oracle_decisions(const std::vector<std::int64_t>& times, int max_attempts,
                                                    std::int64_t window) {
  std::vector<OracleDecision> out;
  std::optional<std::int64_t> start;
  int used = 0;
  for (auto t : times) {
    if (!start || t >= *start + window) {
      start = t;
      used = 1;
      out.push_back({true, 0});
    } else if (used < max_attempts) {
      ++used;
      out.push_back({true, 0});
    } else {
      out.push_back({false, *start + window - t});
    }
  }
  return out;
}

}  // namespace cftest
