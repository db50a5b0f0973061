#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>

#include "json.hpp"

#include "courseforge/telemetry/log.hpp"

namespace courseforge::telemetry {

struct QuestionActivity {
  std::int64_t attempts = 0;  // RunAttempt events
  std::int64_t passed = 0;
  std::int64_t distinct_students = 0;
  double pass_rate = 0;  // passed / attempts; 0 when there are no attempts
  std::int64_t denials = 0;

  friend bool operator==(const QuestionActivity&, const QuestionActivity&) = default;
};

// Keyed by (assignment_id, question_id). A question appears once it has any
// RunAttempt or VelocityDenied event. distinct_students counts students with
// at least one RunAttempt.
using AnalyticsSummary = std::map<std::pair<std::string, std::string>, QuestionActivity>;

AnalyticsSummary analytics_summary(const AttemptLog& log);
nlohmann::json to_json(const AnalyticsSummary& summary);

}  // namespace courseforge::telemetry
