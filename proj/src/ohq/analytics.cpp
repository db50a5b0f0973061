#include "courseforge/ohq/analytics.hpp"

#include <algorithm>

#include "courseforge/common/stats.hpp"

namespace courseforge::ohq {

using nlohmann::json;

json Concentration::to_json() const {
  return {{"k_students", k_students},
          {"total_tickets", total_tickets},
          {"distinct_students", distinct_students},
          {"tickets_of_top_k", tickets_of_top_k},
          {"ticket_share", ticket_share},
          {"fraction_of_students", fraction_of_students ? json(*fraction_of_students) : json(nullptr)}};
}

Concentration concentration(const std::vector<QueueEvent>& events, std::optional<std::int64_t> roster_size) {
  std::map<std::string, std::int64_t> per_student;
  Concentration c;
  for (const auto& e : events) {
    if (e.kind != EventKind::kTicketCreated) continue;
    ++per_student[e.student_id];
    ++c.total_tickets;
  }
  std::vector<std::pair<std::string, std::int64_t>> ranked(per_student.begin(), per_student.end());
  std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
  c.distinct_students = static_cast<std::int64_t>(ranked.size());
  for (const auto& [student, count] : ranked) {
    if (2 * c.tickets_of_top_k >= c.total_tickets && c.k_students > 0) break;
    c.tickets_of_top_k += count;
    ++c.k_students;
  }
  if (c.total_tickets > 0) c.ticket_share = static_cast<double>(c.tickets_of_top_k) / static_cast<double>(c.total_tickets);
  if (roster_size && *roster_size > 0) {
    c.fraction_of_students = static_cast<double>(c.k_students) / static_cast<double>(*roster_size);
  }
  return c;
}

std::map<std::string, AssignmentWaits> wait_stats(const std::vector<QueueEvent>& events, const Bucketing& bucketing) {
  struct Open {
    std::string assignment;
    std::int64_t created_at;
  };
  std::map<std::string, Open> awaiting;  // ticket id -> creation info, until first assignment
  std::map<std::string, std::vector<std::int64_t>> waits;
  std::map<std::string, AssignmentWaits> out;
  const std::int64_t width = std::max<std::int64_t>(1, bucketing.width_seconds);
  const std::int64_t per_day = std::max<std::int64_t>(1, 86400 / width);

  for (const auto& e : events) {
    if (e.kind == EventKind::kTicketCreated) {
      awaiting[e.ticket_id] = {e.assignment, e.timestamp};
      std::int64_t bucket = e.timestamp / width;
      if (bucketing.wrap_daily) bucket = ((bucket % per_day) + per_day) % per_day;
      ++out[e.assignment].histogram[bucket];
    } else if (e.kind == EventKind::kTicketAssigned) {
      auto it = awaiting.find(e.ticket_id);
      if (it == awaiting.end()) continue;  // re-assignment after a requeue
      waits[it->second.assignment].push_back(e.timestamp - it->second.created_at);
      awaiting.erase(it);
    }
  }
  for (auto& [assignment, w] : out) {
    const auto& v = waits[assignment];
    w.count = static_cast<std::int64_t>(v.size());
    w.mean_wait = mean_of(v);
    w.p95_wait = percentile_nearest_rank(v, 95);
  }
  return out;
}

json to_json(const std::map<std::string, AssignmentWaits>& stats) {
  json out = json::object();
  for (const auto& [assignment, w] : stats) {
    json hist = json::object();
    for (const auto& [bucket, n] : w.histogram) hist[std::to_string(bucket)] = n;
    out[assignment] = {{"count", w.count}, {"mean_wait", w.mean_wait}, {"p95_wait", w.p95_wait}, {"histogram", hist}};
  }
  return out;
}

}  // namespace courseforge::ohq
