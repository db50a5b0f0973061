#include "courseforge/telemetry/velocity.hpp"

#include <optional>

#include "courseforge/common/error.hpp"

namespace courseforge::telemetry {

void VelocityConfig::validate() const {
  if (max_attempts < 1) throw user_error("velocity", "max_attempts must be >= 1");
  if (window_seconds < 1) throw user_error("velocity", "window_seconds must be >= 1");
}

VelocityDecision check_velocity(const AttemptLog& log, const VelocityConfig& config,
                                std::string_view student_id, std::string_view question_id,
                                std::int64_t now) {
  std::optional<std::int64_t> window_start;
  std::int64_t counted = 0;
  for (const auto& e : log.events()) {
    if (e.timestamp > now) break;
    if (e.kind() != EventKind::kRunAttempt || e.student_id != student_id ||
        e.question_id != question_id) {
      continue;
    }
    if (!window_start || e.timestamp >= *window_start + config.window_seconds) {
      window_start = e.timestamp;
      counted = 0;
    }
    ++counted;
  }
  if (!window_start || now >= *window_start + config.window_seconds) return {true, 0};
  if (counted < config.max_attempts) return {true, 0};
  return {false, *window_start + config.window_seconds - now};
}

}  // namespace courseforge::telemetry
