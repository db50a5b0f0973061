#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "courseforge/ohq/queue.hpp"

namespace courseforge::ohq {

struct Concentration {
  std::int64_t k_students = 0;
  std::int64_t total_tickets = 0;
  std::int64_t distinct_students = 0;
  std::int64_t tickets_of_top_k = 0;
  double ticket_share = 0;  // tickets_of_top_k / total_tickets
  std::optional<double> fraction_of_students;  // k / roster_size, when a roster size is given

  nlohmann::json to_json() const;
};

// Smallest k such that the k heaviest askers (ticket count descending, ties
// by student_id ascending) filed at least half of all tickets.
Concentration concentration(const std::vector<QueueEvent>& events,
                            std::optional<std::int64_t> roster_size = std::nullopt);

struct Bucketing {
  std::int64_t width_seconds = 3600;
  // Fold buckets onto a 24-hour day (hour-of-day histogram).
  bool wrap_daily = true;
};

struct AssignmentWaits {
  std::int64_t count = 0;  // tickets that reached their first assignment
  double mean_wait = 0;    // seconds, created -> first assignment
  std::int64_t p95_wait = 0;
  std::map<std::int64_t, std::int64_t> histogram;  // bucket -> tickets created
};

std::map<std::string, AssignmentWaits> wait_stats(const std::vector<QueueEvent>& events,
                                                  const Bucketing& bucketing = {});
nlohmann::json to_json(const std::map<std::string, AssignmentWaits>& stats);

}  // namespace courseforge::ohq
