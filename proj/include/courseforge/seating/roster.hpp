#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "courseforge/seating/room.hpp"

namespace courseforge::seating {

struct StudentPrefs {
  std::string student_id;
  std::string name;
  std::string email;
  AttrSet hard;  // required (accommodations); never includes broken
  AttrSet soft;  // preferred; unit weight each

  friend bool operator==(const StudentPrefs&, const StudentPrefs&) = default;
};

struct Roster {
  std::vector<StudentPrefs> students;  // file order

  const StudentPrefs* find(std::string_view student_id) const;
  std::size_t size() const { return students.size(); }
};

inline constexpr std::string_view kRosterHeader = "student_id,name,email,hard_attrs,soft_attrs";

// CSV with the header above; attribute lists are ';'-separated. Errors name
// the offending row (1-based line number in the file).
Roster parse_roster(std::string_view text);
Roster load_roster(const std::filesystem::path& path);

// Canonical form: header, LF line endings, attributes in fixed order.
// parse_roster(serialize_roster(r)) == r, and canonical input reproduces
// itself byte for byte.
std::string serialize_roster(const Roster& roster);

}  // namespace courseforge::seating
