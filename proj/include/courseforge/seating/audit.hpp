#pragma once

#include <optional>
#include <string>
#include <vector>

#include "courseforge/seating/assign.hpp"

namespace courseforge::seating {

struct Neighbor {
  int row = 0;
  int col = 0;
  std::optional<std::string> occupant;

  friend bool operator==(const Neighbor&, const Neighbor&) = default;
};

// Physical seats in the 8 surrounding cells, row-major, with the students the
// plan puts there. Throws when (row, col) is not a seat of the room.
std::vector<Neighbor> adjacent(const Room& room, int row, int col, const SeatingPlan& plan);

struct Violation {
  std::string kind;  // e.g. "duplicate-seat", "broken-seat", "hard-constraint"
  std::string student_id;
  std::string detail;
};

struct AuditEntry {
  std::string student_id;
  Placement seat;
  std::vector<std::string> neighbors;  // adjacent occupants, row-major
};

struct AuditReport {
  std::vector<Violation> violations;
  std::vector<AuditEntry> entries;  // sorted by student_id
  int recomputed_soft_score = 0;
  std::string content_hash;  // sha256 over the report body

  bool ok() const { return violations.empty(); }
  nlohmann::json to_json() const;
};

// Re-checks every plan invariant against the rooms, pattern and student list.
AuditReport audit(const SeatingPlan& plan, const std::vector<Room>& rooms, const UsabilityPattern& pattern,
                  const std::vector<StudentPrefs>& students);

}  // namespace courseforge::seating
