#include "courseforge/testkit/question.hpp"

#include <algorithm>

namespace courseforge::testkit {

using nlohmann::json;

namespace {

json case_json(const CaseResult& r) {
  json j = {{"case_id", r.case_id}, {"outcome", outcome_name(r.outcome)}};
  if (const auto* f = std::get_if<Fail>(&r.outcome)) {
    j["actual_lines"] = f->actual_lines;
    j["first_divergent_line_index"] = f->first_divergent_line_index;
  } else if (const auto* e = std::get_if<SubjectError>(&r.outcome)) {
    j["exit_code"] = e->exit_code;
  }
  return j;
}

std::string_view status_name(QuestionStatus s) {
  switch (s) {
    case QuestionStatus::kRan: return "Ran";
    case QuestionStatus::kLockedPending: return "LockedPending";
    case QuestionStatus::kVelocityDenied: return "VelocityDenied";
  }
  return "?";
}

void emit(RunContext& ctx, telemetry::AttemptLog& log, telemetry::AttemptEvent event) {
  log.append(event);
  if (ctx.on_event) ctx.on_event(log.events().back());
}

// Runs `cases` in order until the first non-Pass; the rest become NotRun.
// Returns true iff every case passed.
bool run_stage(const std::vector<TestCase>& cases, const std::string& question_id,
               const SubjectCommand& subject, const unlock::UnlockState& state,
               SubjectExecutor& executor, std::vector<CaseResult>& out,
               std::optional<std::string>& stopped_at) {
  bool ok = true;
  for (const auto& c : cases) {
    if (!ok) {
      out.push_back({c.id, NotRun{}});
      continue;
    }
    CaseResult r;
    if (c.locked && !c.expected_lines) {
      TestCase unlocked = c;
      if (const auto* answer = state.answer(case_key(question_id, c.id))) unlocked.expected_lines = *answer;
      r = run_case(unlocked, subject, executor);
    } else {
      r = run_case(c, subject, executor);
    }
    if (!r.passed()) {
      ok = false;
      stopped_at = c.id;
    }
    out.push_back(std::move(r));
  }
  return ok;
}

}  // namespace

bool QuestionResult::passed() const {
  if (status != QuestionStatus::kRan) return false;
  auto all_pass = [](const std::vector<CaseResult>& v) {
    return std::all_of(v.begin(), v.end(), [](const CaseResult& r) { return r.passed(); });
  };
  return all_pass(cases) && all_pass(gated_cases);
}

json QuestionResult::to_json() const {
  json j = {{"question_id", question_id}, {"status", status_name(status)}};
  if (status == QuestionStatus::kLockedPending) j["locked_case_ids"] = locked_case_ids;
  if (status == QuestionStatus::kVelocityDenied) j["retry_after_seconds"] = retry_after_seconds;
  j["cases"] = json::array();
  for (const auto& r : cases) j["cases"].push_back(case_json(r));
  j["gated_cases"] = json::array();
  for (const auto& r : gated_cases) j["gated_cases"].push_back(case_json(r));
  j["stopped_at"] = stopped_at ? json(*stopped_at) : json(nullptr);
  j["passed"] = passed();
  return j;
}

QuestionResult run_question(const Question& question, const SubjectCommand& subject,
                            const unlock::UnlockState& unlock_state,
                            const telemetry::VelocityLimiter& limiter, std::int64_t now,
                            RunContext& context) {
  QuestionResult result;
  result.question_id = question.id;

  for (const auto& c : question.cases) {
    if (c.locked && !unlock_state.is_unlocked(case_key(question.id, c.id))) {
      result.locked_case_ids.push_back(c.id);
    }
  }
  if (!result.locked_case_ids.empty()) {
    result.status = QuestionStatus::kLockedPending;
    return result;
  }

  telemetry::AttemptLog scratch;
  telemetry::AttemptLog& log = context.log ? *context.log : scratch;
  telemetry::AttemptEvent event;
  event.student_id = context.student_id;
  event.assignment_id = context.assignment_id;
  event.question_id = question.id;
  event.timestamp = now;

  auto decision = limiter.check(log, context.student_id, question.id, now);
  if (!decision.allowed) {
    result.status = QuestionStatus::kVelocityDenied;
    result.retry_after_seconds = decision.retry_after_seconds;
    event.payload = telemetry::DeniedPayload{decision.retry_after_seconds};
    emit(context, log, std::move(event));
    return result;
  }

  ProcessExecutor default_executor;
  SubjectExecutor& executor = context.executor ? *context.executor : default_executor;

  bool ungated_ok = run_stage(question.cases, question.id, subject, unlock_state, executor,
                              result.cases, result.stopped_at);
  if (ungated_ok) {
    run_stage(question.gated_cases, question.id, subject, unlock_state, executor,
              result.gated_cases, result.stopped_at);
  } else {
    for (const auto& c : question.gated_cases) result.gated_cases.push_back({c.id, NotRun{}});
  }

  event.payload = telemetry::RunPayload{result.passed()};
  emit(context, log, std::move(event));
  return result;
}

}  // namespace courseforge::testkit
