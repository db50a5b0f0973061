#include "courseforge/seating/roster.hpp"

#include <map>

#include "courseforge/common/csv.hpp"
#include "courseforge/common/error.hpp"
#include "courseforge/common/files.hpp"

namespace courseforge::seating {

namespace {

AttrSet parse_attr_list(const std::string& field, std::size_t line, const char* column) {
  AttrSet set;
  if (field.empty()) return set;
  std::size_t start = 0;
  while (start <= field.size()) {
    auto end = field.find(';', start);
    if (end == std::string::npos) end = field.size();
    std::string name = field.substr(start, end - start);
    Attr a;
    try {
      a = parse_attr(name);
    } catch (const Error& e) {
      throw user_error("roster", "row " + std::to_string(line) + ": " + column + ": " + e.what());
    }
    if (a == kBroken) {
      throw user_error("roster", "row " + std::to_string(line) + ": " + column + ": 'broken' cannot be requested");
    }
    set.bits |= a;
    start = end + 1;
  }
  return set;
}

std::string attr_list(AttrSet set) {
  std::string out;
  for (const auto& n : attr_names(set)) {
    if (!out.empty()) out.push_back(';');
    out += n;
  }
  return out;
}

}  // namespace

const StudentPrefs* Roster::find(std::string_view student_id) const {
  for (const auto& s : students) {
    if (s.student_id == student_id) return &s;
  }
  return nullptr;
}

Roster parse_roster(std::string_view text) {
  std::vector<csv::Row> rows;
  try {
    rows = csv::parse(text);
  } catch (const Error& e) {
    throw user_error("roster", e.what());
  }
  if (rows.empty()) throw user_error("roster", "empty roster (expected header '" + std::string(kRosterHeader) + "')");
  if (csv::join(rows[0].fields) != kRosterHeader) {
    throw user_error("roster", "row 1: header must be '" + std::string(kRosterHeader) + "'");
  }
  Roster roster;
  std::map<std::string, std::size_t> seen;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto& row = rows[i];
    std::string where = "row " + std::to_string(row.line);
    if (row.fields.size() != 5) {
      throw user_error("roster", where + ": expected 5 fields, found " + std::to_string(row.fields.size()));
    }
    StudentPrefs s{row.fields[0], row.fields[1], row.fields[2], {}, {}};
    if (s.student_id.empty()) throw user_error("roster", where + ": empty student_id");
    s.hard = parse_attr_list(row.fields[3], row.line, "hard_attrs");
    s.soft = parse_attr_list(row.fields[4], row.line, "soft_attrs");
    auto [it, fresh] = seen.emplace(s.student_id, row.line);
    if (!fresh) {
      throw user_error("roster", "duplicate student_id '" + s.student_id + "' on rows " + std::to_string(it->second) +
                                     " and " + std::to_string(row.line));
    }
    roster.students.push_back(std::move(s));
  }
  return roster;
}

Roster load_roster(const std::filesystem::path& path) { return parse_roster(read_file(path)); }

std::string serialize_roster(const Roster& roster) {
  std::string out(kRosterHeader);
  out.push_back('\n');
  for (const auto& s : roster.students) {
    out += csv::join({s.student_id, s.name, s.email, attr_list(s.hard), attr_list(s.soft)});
    out.push_back('\n');
  }
  return out;
}

}  // namespace courseforge::seating
