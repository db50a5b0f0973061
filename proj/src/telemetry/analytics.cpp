#include "courseforge/telemetry/analytics.hpp"

#include <set>

namespace courseforge::telemetry {

AnalyticsSummary analytics_summary(const AttemptLog& log) {
  AnalyticsSummary summary;
  std::map<std::pair<std::string, std::string>, std::set<std::string>> students;
  for (const auto& e : log.events()) {
    auto key = std::make_pair(e.assignment_id, e.question_id);
    if (const auto* run = std::get_if<RunPayload>(&e.payload)) {
      auto& q = summary[key];
      ++q.attempts;
      if (run->passed) ++q.passed;
      students[key].insert(e.student_id);
    } else if (e.kind() == EventKind::kVelocityDenied) {
      ++summary[key].denials;
    }
  }
  for (auto& [key, q] : summary) {
    q.distinct_students = static_cast<std::int64_t>(students[key].size());
    q.pass_rate = q.attempts ? static_cast<double>(q.passed) / static_cast<double>(q.attempts) : 0.0;
  }
  return summary;
}

nlohmann::json to_json(const AnalyticsSummary& summary) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& [key, q] : summary) {
    out.push_back({{"assignment_id", key.first},
                   {"question_id", key.second},
                   {"attempts", q.attempts},
                   {"distinct_students", q.distinct_students},
                   {"pass_rate", q.pass_rate},
                   {"denials", q.denials}});
  }
  return out;
}

}  // namespace courseforge::telemetry
