#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "courseforge/common/error.hpp"

namespace courseforge::testkit {

inline constexpr std::int64_t kDefaultTimeoutMs = 10'000;

struct TestCase {
  std::string id;
  std::string prompt;
  std::string stdin_text;
  // Absent in student-distributed specs when the case is locked.
  std::optional<std::vector<std::string>> expected_lines;
  bool locked = false;
  std::optional<std::vector<std::string>> choices;
  std::int64_t timeout_ms = kDefaultTimeoutMs;
  bool case_insensitive = false;  // ASCII case folded when unlocking and when comparing output

  friend bool operator==(const TestCase&, const TestCase&) = default;
};

struct Question {
  std::string id;
  double points = 0;
  std::vector<TestCase> cases;
  // Integration cases; executed only after every entry of `cases` passes.
  std::vector<TestCase> gated_cases;

  friend bool operator==(const Question&, const Question&) = default;
};

struct TestSpec {
  std::string assignment_id;
  std::string version;
  std::vector<Question> questions;

  const Question* find_question(std::string_view id) const;

  friend bool operator==(const TestSpec&, const TestSpec&) = default;
};

// Thrown for malformed documents (kind "parse") and invariant violations
// (kind "validation"). `line` is 1-based and 0 when unknown.
class SpecError : public Error {
 public:
  SpecError(std::string kind, std::size_t line, std::string field, const std::string& message);

  std::size_t line() const { return line_; }
  const std::string& field() const { return field_; }

 private:
  std::size_t line_;
  std::string field_;
};

enum class Audience {
  kInstructor,  // everything, including expected output of locked cases
  kStudent,     // expected_lines omitted for locked cases
};

TestSpec parse_spec(std::string_view document);
TestSpec load_spec(const std::string& path);

// Throws SpecError("validation") on duplicate ids, negative points,
// non-positive timeouts, locked gated cases, and similar.
void validate(const TestSpec& spec);

nlohmann::json to_json(const TestSpec& spec, Audience audience);
std::string serialize_spec(const TestSpec& spec, Audience audience);

// Qualified key used by the unlock vault and unlock state; case ids are only
// unique within a question.
std::string case_key(std::string_view question_id, std::string_view case_id);

}  // namespace courseforge::testkit
