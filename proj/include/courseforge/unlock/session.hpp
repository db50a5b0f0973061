#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "courseforge/telemetry/log.hpp"
#include "courseforge/testkit/spec.hpp"
#include "courseforge/unlock/state.hpp"
#include "courseforge/unlock/vault.hpp"

namespace courseforge::unlock {

struct UnlockPrompt {
  std::string question_id;
  std::string case_id;
  std::string prompt;
  std::vector<std::string> choices;  // already shuffled for this student; empty if free response
};

// Prompt/answer channel. read_answer returning nullopt aborts the session.
class UnlockIo {
 public:
  virtual ~UnlockIo() = default;
  virtual void present(const UnlockPrompt& prompt) = 0;
  virtual std::optional<std::string> read_answer() = 0;
  virtual void feedback(bool correct) = 0;
};

// Line-oriented terminal channel. Free-response answers end at an empty
// line (or EOF); multiple-choice answers are a single line holding either the
// choice text or its 1-based number.
class StreamIo final : public UnlockIo {
 public:
  StreamIo(std::istream& in, std::ostream& out) : in_(in), out_(out) {}
  void present(const UnlockPrompt& prompt) override;
  std::optional<std::string> read_answer() override;
  void feedback(bool correct) override;

 private:
  std::istream& in_;
  std::ostream& out_;
  bool multiple_choice_ = false;
};

struct SessionContext {
  std::string student_id;
  // Receives one UnlockAttempt event per attempt, in order.
  std::function<void(const telemetry::AttemptEvent&)> on_event;
  std::function<std::int64_t()> clock;
};

// Deterministic in (assignment_id, case id, student_id). Throws when the case
// has no choices.
std::vector<std::string> shuffle_choices(const testkit::TestCase& test_case,
                                         std::string_view assignment_id,
                                         std::string_view student_id);

// Walks locked cases in spec order, skipping those already unlocked, until
// each is answered correctly or the student aborts. Unlock attempts are never
// rate limited.
UnlockState unlock_session(const UnlockVault& vault, const testkit::TestSpec& spec,
                           UnlockState state, UnlockIo& io, const SessionContext& context);

}  // namespace courseforge::unlock
