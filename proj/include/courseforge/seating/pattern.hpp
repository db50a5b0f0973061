#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "courseforge/seating/room.hpp"

namespace courseforge::seating {

struct UsabilityPattern {
  enum class Mode {
    kAll,
    kEveryOther,    // same column parity on every row: col % 2 == offset
    kCheckerboard,  // alternating per row: (row + col) % 2 == offset
    kSkipRows,      // keep row r iff r % (k + 1) == 0
  };

  Mode mode = Mode::kAll;
  int param = 0;  // offset (0|1) or k (>= 0)

  static UsabilityPattern all() { return {}; }
  static UsabilityPattern every_other(int offset) { return {Mode::kEveryOther, offset}; }
  static UsabilityPattern checkerboard(int offset) { return {Mode::kCheckerboard, offset}; }
  static UsabilityPattern skip_rows(int k) { return {Mode::kSkipRows, k}; }

  // "all", "every-other:<0|1>", "checkerboard:<0|1>", "skip-rows:<k>"
  static UsabilityPattern parse(std::string_view text);
  std::string to_string() const;

  // Position rule only; broken seats and missing seats are handled by usable_seats.
  bool admits(int row, int col) const;

  friend bool operator==(const UsabilityPattern&, const UsabilityPattern&) = default;
};

struct SeatRef {
  int row = 0;
  int col = 0;
  friend auto operator<=>(const SeatRef&, const SeatRef&) = default;
};

// Non-broken seats admitted by the pattern, row-major.
std::vector<SeatRef> usable_seats(const Room& room, const UsabilityPattern& pattern);
bool is_usable(const Room& room, const UsabilityPattern& pattern, int row, int col);

}  // namespace courseforge::seating
