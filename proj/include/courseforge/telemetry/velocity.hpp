#pragma once

#include <cstdint>
#include <string_view>

#include "courseforge/telemetry/log.hpp"

namespace courseforge::telemetry {

// Per-question quota: at most `max_attempts` counted runs per window. The
// window opens at the first counted run after the previous window expired.
struct VelocityConfig {
  int max_attempts = 10;
  std::int64_t window_seconds = 900;

  void validate() const;
};

struct VelocityDecision {
  bool allowed = true;
  std::int64_t retry_after_seconds = 0;  // > 0 iff denied

  friend bool operator==(const VelocityDecision&, const VelocityDecision&) = default;
};

// Only RunAttempt events for (student, question) count; VelocityDenied
// events never consume quota.
VelocityDecision check_velocity(const AttemptLog& log, const VelocityConfig& config,
                                std::string_view student_id, std::string_view question_id,
                                std::int64_t now);

class VelocityLimiter {
 public:
  explicit VelocityLimiter(VelocityConfig config) : config_(config) { config_.validate(); }

  VelocityDecision check(const AttemptLog& log, std::string_view student_id,
                         std::string_view question_id, std::int64_t now) const {
    return check_velocity(log, config_, student_id, question_id, now);
  }
  const VelocityConfig& config() const { return config_; }

 private:
  VelocityConfig config_;
};

}  // namespace courseforge::telemetry
