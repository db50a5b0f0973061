#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace courseforge::seating {

enum Attr : std::uint8_t {
  kLeftHanded = 1u << 0,
  kAisle = 1u << 1,
  kFront = 1u << 2,
  kBroken = 1u << 3,
};

// Bit set of Attr values.
struct AttrSet {
  std::uint8_t bits = 0;

  bool has(Attr a) const { return (bits & a) != 0; }
  bool contains(AttrSet other) const { return (bits & other.bits) == other.bits; }
  int count_common(AttrSet other) const { return __builtin_popcount(bits & other.bits); }
  AttrSet missing_from(AttrSet other) const { return {static_cast<std::uint8_t>(bits & ~other.bits)}; }
  bool empty() const { return bits == 0; }

  friend bool operator==(AttrSet, AttrSet) = default;
};

// Throws for names outside {left_handed, aisle, front, broken}.
Attr parse_attr(std::string_view name);
std::vector<std::string> attr_names(AttrSet set);

struct Seat {
  AttrSet attrs;
  friend bool operator==(const Seat&, const Seat&) = default;
};

struct Room {
  std::string room_id;
  int rows = 0;
  int cols = 0;
  std::vector<std::optional<Seat>> grid;  // row-major; nullopt = no seat here

  bool in_bounds(int row, int col) const { return row >= 0 && col >= 0 && row < rows && col < cols; }
  const std::optional<Seat>& at(int row, int col) const { return grid[static_cast<std::size_t>(row * cols + col)]; }
  bool has_seat(int row, int col) const { return in_bounds(row, col) && at(row, col).has_value(); }
  std::size_t seat_count() const;

  friend bool operator==(const Room&, const Room&) = default;
};

// {"room_id": "...", "rows": [[{"attrs": [...]}, null, ...], ...]}
Room parse_room(std::string_view document);
Room load_room(const std::filesystem::path& path);
nlohmann::json to_json(const Room& room);

// Every *.json file in `dir`, in file-name order. Room ids must be unique.
std::vector<Room> load_rooms(const std::filesystem::path& dir);

// Seat label shown to students: row letters (A..Z, AA, AB, ...) + 1-based column.
std::string seat_label(int row, int col);

}  // namespace courseforge::seating
