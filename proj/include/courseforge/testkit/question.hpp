#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "courseforge/telemetry/log.hpp"
#include "courseforge/telemetry/velocity.hpp"
#include "courseforge/testkit/runner.hpp"
#include "courseforge/testkit/spec.hpp"
#include "courseforge/unlock/state.hpp"

namespace courseforge::testkit {

enum class QuestionStatus {
  kRan,
  kLockedPending,   // some locked case is not unlocked yet; nothing ran
  kVelocityDenied,  // limiter refused; nothing ran
};

struct QuestionResult {
  std::string question_id;
  QuestionStatus status = QuestionStatus::kRan;
  // One entry per case in spec order; NotRun for skipped ones.
  std::vector<CaseResult> cases;
  std::vector<CaseResult> gated_cases;
  std::optional<std::string> stopped_at;
  std::vector<std::string> locked_case_ids;  // kLockedPending
  std::int64_t retry_after_seconds = 0;      // kVelocityDenied

  bool passed() const;
  nlohmann::json to_json() const;

  friend bool operator==(const QuestionResult&, const QuestionResult&) = default;
};

struct RunContext {
  std::string student_id;
  std::string assignment_id;
  // Attempt log the limiter reads and the run appends to.
  telemetry::AttemptLog* log = nullptr;
  // Called after each appended event (e.g. to persist it).
  std::function<void(const telemetry::AttemptEvent&)> on_event;
  SubjectExecutor* executor = nullptr;  // null: spawn real processes
};

// Lock check first (a locked question is not an attempt and costs no quota),
// then the velocity limiter, then ungated cases in order with
// stop-at-first-failure, then gated cases only if all ungated ones passed.
// Emits exactly one RunAttempt or VelocityDenied event unless locked.
QuestionResult run_question(const Question& question, const SubjectCommand& subject,
                            const unlock::UnlockState& unlock_state,
                            const telemetry::VelocityLimiter& limiter, std::int64_t now,
                            RunContext& context);

}  // namespace courseforge::testkit
