#include "courseforge/seating/assign.hpp"

#include <set>

#include "courseforge/common/files.hpp"
#include "courseforge/common/rng.hpp"
#include "courseforge/seating/hungarian.hpp"

namespace courseforge::seating {

using nlohmann::json;

namespace {

std::string id_list(const std::vector<std::string>& ids) {
  std::string out;
  for (const auto& id : ids) {
    if (!out.empty()) out += ", ";
    out += id;
  }
  return out.empty() ? "none" : out;
}

std::string infeasible_message(int deficit, const std::vector<std::string>& none, const std::vector<std::string>& unmatched) {
  return "deficit " + std::to_string(deficit) + "; no eligible seat: " + id_list(none) +
         "; unmatched: " + id_list(unmatched);
}

// Largest possible soft score: every attribute a student may prefer.
constexpr int kMaxSoft = 3;

}  // namespace

InfeasibleError::InfeasibleError(int deficit, std::vector<std::string> no_eligible_seat, std::vector<std::string> unmatched)
    : Error(ErrorCategory::kDomain, "infeasible", infeasible_message(deficit, no_eligible_seat, unmatched)),
      deficit_(deficit),
      no_eligible_(std::move(no_eligible_seat)),
      unmatched_(std::move(unmatched)) {}

int soft_score(const StudentPrefs& student, AttrSet seat) { return student.soft.count_common(seat); }

bool satisfies_hard(const StudentPrefs& student, AttrSet seat) { return seat.contains(student.hard); }

json SeatingPlan::to_json() const {
  json list = json::array();
  for (const auto& [id, p] : assignments) {
    list.push_back({{"student_id", id}, {"room_id", p.room_id}, {"row", p.row}, {"col", p.col}, {"seat", seat_label(p.row, p.col)}});
  }
  return {{"pattern", pattern}, {"seed", seed}, {"total_soft_score", total_soft_score}, {"assignments", std::move(list)}};
}

SeatingPlan SeatingPlan::from_json(const json& j) {
  try {
    SeatingPlan plan;
    plan.pattern = j.at("pattern").get<std::string>();
    plan.seed = j.at("seed").get<std::uint64_t>();
    plan.total_soft_score = j.at("total_soft_score").get<int>();
    for (const auto& a : j.at("assignments")) {
      auto id = a.at("student_id").get<std::string>();
      Placement p{a.at("room_id").get<std::string>(), a.at("row").get<int>(), a.at("col").get<int>()};
      if (!plan.assignments.emplace(id, p).second) throw user_error("plan", "student '" + id + "' appears twice in plan");
    }
    return plan;
  } catch (const json::exception& e) {
    throw user_error("plan", std::string("malformed plan: ") + e.what());
  }
}

std::string SeatingPlan::serialize() const { return to_json().dump(2) + "\n"; }

SeatingPlan load_plan(const std::filesystem::path& path) {
  json j = json::parse(read_file(path), nullptr, false);
  if (j.is_discarded()) throw user_error("plan", "plan file '" + path.string() + "' is not valid JSON");
  return SeatingPlan::from_json(j);
}

SeatingPlan assign(const std::vector<StudentPrefs>& students, const std::vector<Room>& rooms,
                   const UsabilityPattern& pattern, std::uint64_t seed) {
  {
    std::set<std::string> ids;
    for (const auto& s : students) {
      if (!ids.insert(s.student_id).second) throw user_error("roster", "duplicate student_id '" + s.student_id + "'");
      if (s.hard.has(kBroken) || s.soft.has(kBroken)) throw user_error("roster", "student '" + s.student_id + "' requests a broken seat");
    }
    std::set<std::string> room_ids;
    for (const auto& r : rooms) {
      if (!room_ids.insert(r.room_id).second) throw user_error("room", "duplicate room_id '" + r.room_id + "'");
    }
  }

  struct SeatNode {
    const Room* room;
    SeatRef ref;
    AttrSet attrs;
  };
  std::vector<SeatNode> seats;
  for (const auto& room : rooms) {
    for (auto ref : usable_seats(room, pattern)) seats.push_back({&room, ref, room.at(ref.row, ref.col)->attrs});
  }
  std::vector<const StudentPrefs*> order;
  for (const auto& s : students) order.push_back(&s);

  SeededRng rng(seed);
  rng.shuffle(order);
  rng.shuffle(seats);

  SeatingPlan plan;
  plan.pattern = pattern.to_string();
  plan.seed = seed;
  const int n = static_cast<int>(order.size());
  const int m = static_cast<int>(seats.size());
  if (n == 0) return plan;

  // Forbidden edges cost more than any all-eligible assignment, so the
  // minimum first maximizes the number of eligible edges, then the score.
  const std::int64_t big = static_cast<std::int64_t>(n) * (kMaxSoft + 1) + 1;
  const int cols = std::max(n, m);
  std::vector<std::int64_t> cost(static_cast<std::size_t>(n) * cols, big);
  std::vector<std::string> no_eligible;
  for (int i = 0; i < n; ++i) {
    bool any = false;
    for (int j = 0; j < m; ++j) {
      if (!satisfies_hard(*order[i], seats[j].attrs)) continue;
      cost[static_cast<std::size_t>(i) * cols + j] = kMaxSoft - soft_score(*order[i], seats[j].attrs);
      any = true;
    }
    if (!any) no_eligible.push_back(order[i]->student_id);
  }

  auto match = min_cost_assignment(cost, n, cols);
  std::vector<std::string> unmatched;
  for (int i = 0; i < n; ++i) {
    int j = match[i];
    if (j >= m || cost[static_cast<std::size_t>(i) * cols + j] == big) {
      unmatched.push_back(order[i]->student_id);
      continue;
    }
    const auto& seat = seats[j];
    plan.assignments[order[i]->student_id] = {seat.room->room_id, seat.ref.row, seat.ref.col};
    plan.total_soft_score += soft_score(*order[i], seat.attrs);
  }
  if (!unmatched.empty()) {
    std::sort(no_eligible.begin(), no_eligible.end());
    std::sort(unmatched.begin(), unmatched.end());
    int deficit = static_cast<int>(unmatched.size());
    throw InfeasibleError(deficit, std::move(no_eligible), std::move(unmatched));
  }
  return plan;
}

}  // namespace courseforge::seating
