#include "courseforge/seating/pattern.hpp"

#include <cstdlib>

#include "courseforge/common/error.hpp"

namespace courseforge::seating {

UsabilityPattern UsabilityPattern::parse(std::string_view text) {
  auto colon = text.find(':');
  std::string_view name = text.substr(0, colon);
  std::string arg = colon == std::string_view::npos ? "" : std::string(text.substr(colon + 1));
  auto number = [&](int lo, int hi) {
    char* end = nullptr;
    long v = std::strtol(arg.c_str(), &end, 10);
    if (arg.empty() || end != arg.c_str() + arg.size() || v < lo || v > hi) {
      throw user_error("pattern", "bad pattern parameter in '" + std::string(text) + "'");
    }
    return static_cast<int>(v);
  };
  if (name == "all" && colon == std::string_view::npos) return all();
  if (name == "every-other") return every_other(number(0, 1));
  if (name == "checkerboard") return checkerboard(number(0, 1));
  if (name == "skip-rows") return skip_rows(number(0, 1000));
  throw user_error("pattern", "unknown pattern '" + std::string(text) +
                                  "' (all | every-other:<0|1> | checkerboard:<0|1> | skip-rows:<k>)");
}

std::string UsabilityPattern::to_string() const {
  switch (mode) {
    case Mode::kAll: return "all";
    case Mode::kEveryOther: return "every-other:" + std::to_string(param);
    case Mode::kCheckerboard: return "checkerboard:" + std::to_string(param);
    case Mode::kSkipRows: return "skip-rows:" + std::to_string(param);
  }
  return "?";
}

bool UsabilityPattern::admits(int row, int col) const {
  switch (mode) {
    case Mode::kAll: return true;
    case Mode::kEveryOther: return col % 2 == param;
    case Mode::kCheckerboard: return (row + col) % 2 == param;
    case Mode::kSkipRows: return row % (param + 1) == 0;
  }
  return false;
}

bool is_usable(const Room& room, const UsabilityPattern& pattern, int row, int col) {
  return room.has_seat(row, col) && !room.at(row, col)->attrs.has(kBroken) && pattern.admits(row, col);
}

std::vector<SeatRef> usable_seats(const Room& room, const UsabilityPattern& pattern) {
  std::vector<SeatRef> out;
  for (int r = 0; r < room.rows; ++r) {
    for (int c = 0; c < room.cols; ++c) {
      if (is_usable(room, pattern, r, c)) out.push_back({r, c});
    }
  }
  return out;
}

}  // namespace courseforge::seating
