#include "courseforge/seating/audit.hpp"

#include <algorithm>
#include <map>

#include "courseforge/common/digest.hpp"

namespace courseforge::seating {

using nlohmann::json;

namespace {

using SeatKey = std::tuple<std::string, int, int>;

std::map<SeatKey, std::vector<std::string>> occupancy(const SeatingPlan& plan) {
  std::map<SeatKey, std::vector<std::string>> out;
  for (const auto& [id, p] : plan.assignments) out[{p.room_id, p.row, p.col}].push_back(id);
  return out;
}

std::vector<Neighbor> neighbors_of(const Room& room, int row, int col,
                                   const std::map<SeatKey, std::vector<std::string>>& occ) {
  std::vector<Neighbor> out;
  for (int r = row - 1; r <= row + 1; ++r) {
    for (int c = col - 1; c <= col + 1; ++c) {
      if ((r == row && c == col) || !room.has_seat(r, c)) continue;
      Neighbor n{r, c, std::nullopt};
      if (auto it = occ.find({room.room_id, r, c}); it != occ.end()) n.occupant = it->second.front();
      out.push_back(std::move(n));
    }
  }
  return out;
}

json placement_json(const Placement& p) {
  return {{"room_id", p.room_id}, {"row", p.row}, {"col", p.col}, {"seat", seat_label(p.row, p.col)}};
}

json body_json(const AuditReport& r) {
  json violations = json::array();
  for (const auto& v : r.violations) {
    violations.push_back({{"kind", v.kind}, {"student_id", v.student_id}, {"detail", v.detail}});
  }
  json entries = json::array();
  for (const auto& e : r.entries) {
    json entry = placement_json(e.seat);
    entry["student_id"] = e.student_id;
    entry["neighbors"] = e.neighbors;
    entries.push_back(std::move(entry));
  }
  return {{"ok", r.ok()},
          {"recomputed_soft_score", r.recomputed_soft_score},
          {"violations", std::move(violations)},
          {"students", std::move(entries)}};
}

}  // namespace

std::vector<Neighbor> adjacent(const Room& room, int row, int col, const SeatingPlan& plan) {
  if (!room.has_seat(row, col)) {
    throw user_error("seat", "no seat at row " + std::to_string(row) + ", col " + std::to_string(col) + " in room '" +
                                 room.room_id + "'");
  }
  return neighbors_of(room, row, col, occupancy(plan));
}

json AuditReport::to_json() const {
  json j = body_json(*this);
  j["hash_alg"] = kHashAlgorithm;
  j["content_hash"] = content_hash;
  return j;
}

AuditReport audit(const SeatingPlan& plan, const std::vector<Room>& rooms, const UsabilityPattern& pattern,
                  const std::vector<StudentPrefs>& students) {
  AuditReport report;
  auto add = [&](std::string kind, const std::string& id, std::string detail) {
    report.violations.push_back({std::move(kind), id, std::move(detail)});
  };

  std::map<std::string, const Room*> room_by_id;
  for (const auto& r : rooms) room_by_id.emplace(r.room_id, &r);
  std::map<std::string, const StudentPrefs*> student_by_id;
  for (const auto& s : students) student_by_id.emplace(s.student_id, &s);

  if (plan.pattern != pattern.to_string()) {
    add("pattern-mismatch", "", "plan says '" + plan.pattern + "', audited under '" + pattern.to_string() + "'");
  }

  auto occ = occupancy(plan);
  for (const auto& [key, ids] : occ) {
    if (ids.size() < 2) continue;
    const auto& [room_id, row, col] = key;
    std::string who;
    for (const auto& id : ids) who += (who.empty() ? "" : ", ") + id;
    for (const auto& id : ids) add("duplicate-seat", id, room_id + " " + seat_label(row, col) + " shared by " + who);
  }

  for (const auto& [id, p] : plan.assignments) {
    std::string where = p.room_id + " " + seat_label(p.row, p.col);
    AuditEntry entry{id, p, {}};
    auto student = student_by_id.find(id);
    if (student == student_by_id.end()) add("unknown-student", id, "not in the student list");
    auto room_it = room_by_id.find(p.room_id);
    if (room_it == room_by_id.end()) {
      add("unknown-room", id, "room '" + p.room_id + "' does not exist");
      report.entries.push_back(std::move(entry));
      continue;
    }
    const Room& room = *room_it->second;
    if (!room.has_seat(p.row, p.col)) {
      add("no-seat", id, where + " is not a seat");
      report.entries.push_back(std::move(entry));
      continue;
    }
    AttrSet attrs = room.at(p.row, p.col)->attrs;
    if (attrs.has(kBroken)) add("broken-seat", id, where + " is broken");
    if (!pattern.admits(p.row, p.col)) add("not-usable", id, where + " is excluded by pattern " + pattern.to_string());
    if (student != student_by_id.end()) {
      const auto& s = *student->second;
      if (!satisfies_hard(s, attrs)) {
        std::string missing;
        for (const auto& n : attr_names(s.hard.missing_from(attrs))) missing += (missing.empty() ? "" : ";") + n;
        add("hard-constraint", id, where + " lacks " + missing);
      }
      report.recomputed_soft_score += soft_score(s, attrs);
    }
    for (const auto& n : neighbors_of(room, p.row, p.col, occ)) {
      if (n.occupant) entry.neighbors.push_back(*n.occupant);
    }
    report.entries.push_back(std::move(entry));
  }

  for (const auto& s : students) {
    if (!plan.assignments.contains(s.student_id)) add("unassigned", s.student_id, "student has no seat");
  }
  if (report.recomputed_soft_score != plan.total_soft_score) {
    add("score-mismatch", "",
        "plan claims " + std::to_string(plan.total_soft_score) + ", seats give " + std::to_string(report.recomputed_soft_score));
  }

  std::stable_sort(report.violations.begin(), report.violations.end(),
                   [](const Violation& a, const Violation& b) { return std::tie(a.kind, a.student_id) < std::tie(b.kind, b.student_id); });
  report.content_hash = to_hex(sha256(body_json(report).dump()));
  return report;
}

}  // namespace courseforge::seating
