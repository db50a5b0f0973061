#include "courseforge/testkit/score.hpp"

#include <algorithm>
#include <cstdio>
#include <map>

namespace courseforge::testkit {

using nlohmann::json;

ScoreReport score(const TestSpec& spec, const std::vector<QuestionResult>& results,
                  const ScoringOptions& options) {
  std::map<std::string, const QuestionResult*> by_id;
  for (const auto& r : results) {
    if (spec.find_question(r.question_id) == nullptr) {
      throw user_error("score", "result for unknown question '" + r.question_id + "'");
    }
    by_id[r.question_id] = &r;
  }

  ScoreReport report;
  report.assignment_id = spec.assignment_id;
  for (const auto& q : spec.questions) {
    QuestionScore s;
    s.question_id = q.id;
    s.points_possible = q.points;
    s.total_count = q.cases.size() + q.gated_cases.size();
    if (auto it = by_id.find(q.id); it != by_id.end()) {
      const QuestionResult& r = *it->second;
      s.attempted = r.status == QuestionStatus::kRan;
      auto count = [](const std::vector<CaseResult>& v) {
        return static_cast<std::size_t>(std::count_if(v.begin(), v.end(), [](const CaseResult& c) { return c.passed(); }));
      };
      s.passed_count = count(r.cases) + count(r.gated_cases);
      s.stopped_at = r.stopped_at;
      if (r.passed()) {
        s.points_awarded = q.points;
      } else if (options.partial_credit && s.total_count > 0) {
        s.points_awarded = q.points * static_cast<double>(s.passed_count) / static_cast<double>(s.total_count);
      }
    }
    report.total_points += s.points_awarded;
    report.total_possible += s.points_possible;
    report.questions.push_back(std::move(s));
  }
  return report;
}

json ScoreReport::to_json() const {
  json qs = json::array();
  for (const auto& s : questions) {
    qs.push_back({{"question_id", s.question_id},
                  {"passed_count", s.passed_count},
                  {"total_count", s.total_count},
                  {"points_awarded", s.points_awarded},
                  {"points_possible", s.points_possible},
                  {"attempted", s.attempted},
                  {"stopped_at", s.stopped_at ? json(*s.stopped_at) : json(nullptr)}});
  }
  return {{"assignment_id", assignment_id},
          {"questions", std::move(qs)},
          {"total_points", total_points},
          {"total_possible", total_possible}};
}

std::string ScoreReport::to_text() const {
  std::string out = "Score for " + assignment_id + "\n";
  char line[256];
  for (const auto& s : questions) {
    std::snprintf(line, sizeof line, "  %-20s %3zu/%-3zu cases  %6.2f/%-6.2f pts%s%s\n",
                  s.question_id.c_str(), s.passed_count, s.total_count, s.points_awarded,
                  s.points_possible, s.stopped_at ? "  stopped at " : "",
                  s.stopped_at ? s.stopped_at->c_str() : "");
    out += line;
  }
  std::snprintf(line, sizeof line, "  Total: %.2f/%.2f\n", total_points, total_possible);
  out += line;
  return out;
}

}  // namespace courseforge::testkit
