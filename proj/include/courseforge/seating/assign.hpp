#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "courseforge/common/error.hpp"
#include "courseforge/seating/pattern.hpp"
#include "courseforge/seating/room.hpp"
#include "courseforge/seating/roster.hpp"

namespace courseforge::seating {

struct Placement {
  std::string room_id;
  int row = 0;
  int col = 0;

  friend auto operator<=>(const Placement&, const Placement&) = default;
};

struct SeatingPlan {
  std::string pattern;  // UsabilityPattern::to_string()
  std::uint64_t seed = 0;
  int total_soft_score = 0;
  std::map<std::string, Placement> assignments;  // student_id -> seat

  nlohmann::json to_json() const;
  static SeatingPlan from_json(const nlohmann::json& j);
  // Pretty JSON plus trailing newline; assignments sorted by student_id.
  std::string serialize() const;
};

SeatingPlan load_plan(const std::filesystem::path& path);

class InfeasibleError : public Error {
 public:
  InfeasibleError(int deficit, std::vector<std::string> no_eligible_seat, std::vector<std::string> unmatched);

  int deficit() const { return deficit_; }
  const std::vector<std::string>& no_eligible_seat() const { return no_eligible_; }
  // Students left without a seat by the maximum matching (includes no_eligible_seat).
  const std::vector<std::string>& unmatched() const { return unmatched_; }

 private:
  int deficit_;
  std::vector<std::string> no_eligible_;
  std::vector<std::string> unmatched_;
};

int soft_score(const StudentPrefs& student, AttrSet seat);
bool satisfies_hard(const StudentPrefs& student, AttrSet seat);

// Maximum-cardinality, maximum-soft-score matching of students to usable
// seats. The seed shuffles students and seats before a deterministic solver,
// so it only chooses among equally scored optima. Throws InfeasibleError
// unless every student gets a seat.
SeatingPlan assign(const std::vector<StudentPrefs>& students, const std::vector<Room>& rooms,
                   const UsabilityPattern& pattern, std::uint64_t seed);

}  // namespace courseforge::seating
