#pragma once

#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "courseforge/testkit/question.hpp"
#include "courseforge/testkit/spec.hpp"

namespace courseforge::testkit {

struct ScoringOptions {
  // Off: all-or-nothing per question. On: points scaled by the fraction of
  // (ungated + gated) cases that passed.
  bool partial_credit = false;
};

struct QuestionScore {
  std::string question_id;
  std::size_t passed_count = 0;
  std::size_t total_count = 0;
  double points_awarded = 0;
  double points_possible = 0;
  std::optional<std::string> stopped_at;
  bool attempted = false;
};

struct ScoreReport {
  std::string assignment_id;
  std::vector<QuestionScore> questions;  // spec order
  double total_points = 0;
  double total_possible = 0;

  nlohmann::json to_json() const;
  std::string to_text() const;
};

// Unattempted questions score 0. A result naming a question the spec does
// not have is an error.
ScoreReport score(const TestSpec& spec, const std::vector<QuestionResult>& results,
                  const ScoringOptions& options = {});

}  // namespace courseforge::testkit
