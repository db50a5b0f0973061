#pragma once

#include <chrono>
#include <cstddef>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "courseforge/common/error.hpp"
#include "courseforge/testkit/spec.hpp"

namespace courseforge::testkit {

// Program under test, as an argv vector. The first element is resolved
// through PATH.
struct SubjectCommand {
  std::vector<std::string> argv;
  std::string working_dir;  // empty: inherit

  // Shell-like word splitting with '...' and "..." quoting and backslash
  // escapes. No expansion of any kind.
  static SubjectCommand parse(std::string_view command_line);
};

struct ExecOutcome {
  std::string stdout_text;
  std::string stderr_text;
  int exit_code = 0;  // 128 + signal number when killed by a signal
  bool timed_out = false;
  std::chrono::milliseconds elapsed{0};
};

// Raised when the subject cannot be started at all (missing binary, no
// execute permission). Distinct from a failing test.
class LaunchError : public Error {
 public:
  explicit LaunchError(const std::string& message)
      : Error(ErrorCategory::kUser, "launch", message) {}
};

class SubjectExecutor {
 public:
  virtual ~SubjectExecutor() = default;
  virtual ExecOutcome execute(const SubjectCommand& subject, std::string_view input,
                              std::chrono::milliseconds timeout) = 0;
};

// Spawns one child process per call, feeds `input` on stdin, captures stdout
// and stderr, and kills the child's process group once `timeout` elapses.
class ProcessExecutor final : public SubjectExecutor {
 public:
  ProcessExecutor();
  ExecOutcome execute(const SubjectCommand& subject, std::string_view input,
                      std::chrono::milliseconds timeout) override;
  std::size_t launches() const { return launches_; }

 private:
  std::size_t launches_ = 0;
};

struct Pass {
  friend bool operator==(const Pass&, const Pass&) = default;
};
struct Fail {
  std::vector<std::string> actual_lines;
  std::size_t first_divergent_line_index = 0;
  friend bool operator==(const Fail&, const Fail&) = default;
};
struct Timeout {
  friend bool operator==(const Timeout&, const Timeout&) = default;
};
struct Locked {
  friend bool operator==(const Locked&, const Locked&) = default;
};
struct SubjectError {
  int exit_code = 0;
  friend bool operator==(const SubjectError&, const SubjectError&) = default;
};
// Placeholder for cases skipped by stop-at-first-failure or gating.
struct NotRun {
  friend bool operator==(const NotRun&, const NotRun&) = default;
};

using Outcome = std::variant<Pass, Fail, Timeout, Locked, SubjectError, NotRun>;

struct CaseResult {
  std::string case_id;
  Outcome outcome;

  bool passed() const { return std::holds_alternative<Pass>(outcome); }
  bool executed() const {
    return !std::holds_alternative<NotRun>(outcome) && !std::holds_alternative<Locked>(outcome);
  }
  friend bool operator==(const CaseResult&, const CaseResult&) = default;
};

std::string_view outcome_name(const Outcome& outcome);

// Index of the first line where the two sequences differ; when one is a
// prefix of the other, the length of the shorter one.
std::size_t first_divergence(const std::vector<std::string>& expected,
                             const std::vector<std::string>& actual);

// A case without expected_lines (locked and not yet unlocked) yields Locked
// and launches nothing.
CaseResult run_case(const TestCase& test_case, const SubjectCommand& subject,
                    SubjectExecutor& executor);
CaseResult run_case(const TestCase& test_case, const SubjectCommand& subject);

}  // namespace courseforge::testkit
