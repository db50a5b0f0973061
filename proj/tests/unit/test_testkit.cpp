#include <gtest/gtest.h>

#include <chrono>

#include "courseforge/testkit/normalize.hpp"
#include "courseforge/testkit/question.hpp"
#include "courseforge/testkit/runner.hpp"
#include "courseforge/testkit/score.hpp"
#include "courseforge/testkit/spec.hpp"
#include "courseforge/common/rng.hpp"
#include "courseforge/unlock/state.hpp"
#include "fake_executor.hpp"
#include "test_support.hpp"

using namespace courseforge;
using namespace courseforge::testkit;
using Lines = std::vector<std::string>;

namespace {

TestCase make_case(std::string id, std::string input, Lines expected) {
  TestCase c;
  c.id = std::move(id);
  c.stdin_text = std::move(input);
  c.expected_lines = std::move(expected);
  return c;
}

Question three_case_question() {
  Question q;
  q.id = "q1";
  q.points = 2;
  q.cases = {make_case("c1", "in1", {"one"}), make_case("c2", "in2", {"two"}), make_case("c3", "in3", {"three"})};
  q.gated_cases = {make_case("g1", "ing", {"gated"})};
  return q;
}

void answer_all(cftest::FakeExecutor& ex) {
  ex.answer("in1", "one\n");
  ex.answer("in2", "two\n");
  ex.answer("in3", "three\n");
  ex.answer("ing", "gated\n");
}

struct Harness {
  cftest::FakeExecutor executor;
  telemetry::AttemptLog log;
  telemetry::VelocityLimiter limiter{telemetry::VelocityConfig{}};
  unlock::UnlockState state{"hw1"};
  RunContext ctx;

  Harness() {
    ctx.student_id = "s1";
    ctx.assignment_id = "hw1";
    ctx.log = &log;
    ctx.executor = &executor;
  }

  QuestionResult run(const Question& q, std::int64_t now = 100) {
    return run_question(q, SubjectCommand{{"subject"}, ""}, state, limiter, now, ctx);
  }
};

constexpr const char* kMinimalSpec = R"({
  "assignment_id": "hw1",
  "version": "1",
  "questions": [
    {"id": "q1", "points": 1, "cases": [{"id": "c1", "stdin": "x", "expected_lines": ["x"]}]}
  ]
})";

}  // namespace

// --- normalize ---------------------------------------------------------------

TEST(Normalize, Examples) {
  EXPECT_EQ(normalize_output("hello\r\n"), (Lines{"hello"}));
  EXPECT_EQ(normalize_output("a  \nb\n\n"), (Lines{"a", "b"}));
  EXPECT_EQ(normalize_output(""), Lines{});
}

TEST(Normalize, LoneCarriageReturnAndInnerBlankLines) {
  EXPECT_EQ(normalize_output("a\rb\t\n\n c \n \n"), (Lines{"a", "b", "", " c"}));
  EXPECT_EQ(normalize_output("\n\n\n"), Lines{});
}

TEST(Normalize, IdempotentOnRandomText) {
  const std::string alphabet = "ab \t\r\n";
  SeededRng rng(5);
  for (int i = 0; i < 2000; ++i) {
    std::string s;
    auto len = rng.below(16);
    for (std::uint64_t k = 0; k < len; ++k) s.push_back(alphabet[rng.below(alphabet.size())]);
    auto once = normalize_output(s);
    ASSERT_EQ(normalize_output(join_lines(once)), once) << "input: " << s;
  }
}

// --- spec ----------------------------------------------------------------------

TEST(Spec, MinimalDocument) {
  auto spec = parse_spec(kMinimalSpec);
  ASSERT_EQ(spec.questions.size(), 1u);
  ASSERT_EQ(spec.questions[0].cases.size(), 1u);
  EXPECT_EQ(spec.questions[0].cases[0].timeout_ms, 10000);
  EXPECT_EQ(parse_spec(serialize_spec(spec, Audience::kInstructor)), spec);
}

TEST(Spec, DuplicateCaseIdNamed) {
  std::string doc = R"({"assignment_id":"hw1","questions":[{"id":"q1","points":1,"cases":[
    {"id":"dup","expected_lines":[]},{"id":"dup","expected_lines":[]}]}]})";
  try {
    parse_spec(doc);
    FAIL() << "expected SpecError";
  } catch (const SpecError& e) {
    EXPECT_EQ(e.code(), "validation");
    EXPECT_NE(std::string(e.what()).find("dup"), std::string::npos);
  }
}

TEST(Spec, MalformedJsonReportsLine) {
  try {
    parse_spec("{\n\"assignment_id\": \"hw1\",\n\"questions\": [,]\n}");
    FAIL() << "expected SpecError";
  } catch (const SpecError& e) {
    EXPECT_EQ(e.code(), "parse");
    EXPECT_EQ(e.line(), 3u);
  }
}

TEST(Spec, FieldErrors) {
  EXPECT_THROW(parse_spec(R"({"assignment_id":"hw1","questions":[],"extra":1})"), SpecError);
  EXPECT_THROW(parse_spec(R"({"assignment_id":"hw1","questions":[{"id":"q","points":-1,"cases":[]}]})"), SpecError);
  EXPECT_THROW(parse_spec(R"({"assignment_id":"hw1","questions":[{"id":"q","points":1,"cases":[{"id":"c","timeout_ms":0}]}]})"),
               SpecError);
  EXPECT_THROW(parse_spec(R"({"assignment_id":"hw 1","questions":[]})"), SpecError);
  EXPECT_THROW(parse_spec(R"({"assignment_id":"hw1","questions":[{"id":"q","points":1,"cases":[],
    "gated_cases":[{"id":"g","locked":true,"expected_lines":["x"]}]}]})"),
               SpecError);
  EXPECT_THROW(parse_spec(R"({"assignment_id":"hw1","questions":[{"id":"q","points":1,"cases":[]},
    {"id":"q","points":1,"cases":[]}]})"),
               SpecError);
}

TEST(Spec, GatedCasesKeptApartAndRoundTrip) {
  auto spec = parse_spec(cftest::slurp(cftest::fixture("specs/three_questions.json")));
  ASSERT_EQ(spec.questions.size(), 3u);
  const auto* q3 = spec.find_question("q3");
  ASSERT_NE(q3, nullptr);
  ASSERT_EQ(q3->gated_cases.size(), 1u);
  EXPECT_EQ(q3->gated_cases[0].id, "integration");
  for (const auto& c : q3->cases) EXPECT_NE(c.id, "integration");
  EXPECT_EQ(parse_spec(serialize_spec(spec, Audience::kInstructor)), spec);
}

TEST(Spec, StudentAudienceHidesLockedAnswers) {
  auto spec = parse_spec(R"({"assignment_id":"hw1","questions":[{"id":"q","points":1,"cases":[
    {"id":"open","expected_lines":["VISIBLE"]},{"id":"lk","locked":true,"expected_lines":["SECRETANSWER"]}]}]})");
  auto text = serialize_spec(spec, Audience::kStudent);
  EXPECT_EQ(text.find("SECRETANSWER"), std::string::npos);
  EXPECT_NE(text.find("VISIBLE"), std::string::npos);
}

// --- run_case (real processes) ---------------------------------------------------------

TEST(RunCase, PassAndExactMatchFailure) {
  auto hello = SubjectCommand::parse("sh -c 'echo hello'");
  auto cap = SubjectCommand::parse("sh -c 'echo Hello'");
  auto c = make_case("c", "", {"hello"});
  EXPECT_TRUE(run_case(c, hello).passed());
  auto r = run_case(c, cap);
  ASSERT_TRUE(std::holds_alternative<Fail>(r.outcome));
  EXPECT_EQ(std::get<Fail>(r.outcome).first_divergent_line_index, 0u);
  EXPECT_EQ(std::get<Fail>(r.outcome).actual_lines, Lines{"Hello"});
}

TEST(RunCase, FeedsStdin) {
  auto c = make_case("c", "line one\nline two\n", {"line one", "line two"});
  EXPECT_TRUE(run_case(c, SubjectCommand::parse("cat")).passed());
}

TEST(RunCase, TimeoutWithinStopwatchSlack) {
  auto c = make_case("c", "", {"never"});
  c.timeout_ms = 100;
  auto t0 = std::chrono::steady_clock::now();
  auto r = run_case(c, SubjectCommand::parse("sh -c 'sleep 5; echo never'"));
  auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - t0).count();
  EXPECT_TRUE(std::holds_alternative<Timeout>(r.outcome)) << outcome_name(r.outcome);
  EXPECT_GE(ms, 100 - 50);
  EXPECT_LE(ms, 100 + 50);
}

TEST(RunCase, ExitCodes) {
  auto c = make_case("c", "", {"ok"});
  auto r = run_case(c, SubjectCommand::parse("sh -c 'echo nope; exit 3'"));
  ASSERT_TRUE(std::holds_alternative<SubjectError>(r.outcome));
  EXPECT_EQ(std::get<SubjectError>(r.outcome).exit_code, 3);
  EXPECT_TRUE(run_case(c, SubjectCommand::parse("sh -c 'echo ok; exit 4'")).passed());
}

TEST(RunCase, MissingBinaryIsLaunchError) {
  auto c = make_case("c", "", {"x"});
  EXPECT_THROW(run_case(c, SubjectCommand::parse("/nonexistent/courseforge-subject")), LaunchError);
}

TEST(RunCase, LockedWithoutAnswerLaunchesNothing) {
  cftest::FakeExecutor ex;
  TestCase c;
  c.id = "lk";
  c.locked = true;
  auto r = run_case(c, SubjectCommand{{"x"}, ""}, ex);
  EXPECT_TRUE(std::holds_alternative<Locked>(r.outcome));
  EXPECT_TRUE(ex.trace.empty());
}

TEST(SubjectCommand, QuotingRules) {
  auto s = SubjectCommand::parse(R"(prog 'a b' "c \"d\"" e\ f)");
  EXPECT_EQ(s.argv, (Lines{"prog", "a b", "c \"d\"", "e f"}));
}

// --- run_question ------------------------------------------------------------------

TEST(RunQuestion, AllPassingRunsGated) {
  Harness h;
  answer_all(h.executor);
  auto r = h.run(three_case_question());
  EXPECT_EQ(r.status, QuestionStatus::kRan);
  EXPECT_TRUE(r.passed());
  EXPECT_EQ(h.executor.trace, (Lines{"in1", "in2", "in3", "ing"}));
  ASSERT_EQ(h.log.size(), 1u);
  EXPECT_EQ(h.log.events()[0].kind(), telemetry::EventKind::kRunAttempt);
  EXPECT_TRUE(std::get<telemetry::RunPayload>(h.log.events()[0].payload).passed);
}

TEST(RunQuestion, StopsAtFirstFailure) {
  Harness h;
  answer_all(h.executor);
  h.executor.answer("in1", "wrong\n");
  auto r = h.run(three_case_question());
  EXPECT_EQ(r.stopped_at, std::optional<std::string>("c1"));
  EXPECT_EQ(outcome_name(r.cases[1].outcome), "NotRun");
  EXPECT_EQ(outcome_name(r.cases[2].outcome), "NotRun");
  EXPECT_EQ(outcome_name(r.gated_cases[0].outcome), "NotRun");
  EXPECT_EQ(h.executor.trace, Lines{"in1"});
  EXPECT_FALSE(std::get<telemetry::RunPayload>(h.log.events()[0].payload).passed);
}

TEST(RunQuestion, GatedFailureStopsAtGatedCase) {
  Harness h;
  answer_all(h.executor);
  h.executor.answer("ing", "broken\n");
  auto r = h.run(three_case_question());
  EXPECT_FALSE(r.passed());
  EXPECT_EQ(r.stopped_at, std::optional<std::string>("g1"));
}

TEST(RunQuestion, LockedCaseLaunchesNothingAndCostsNoQuota) {
  Harness h;
  answer_all(h.executor);
  auto q = three_case_question();
  q.cases[1].locked = true;
  q.cases[1].expected_lines.reset();
  auto r = h.run(q);
  EXPECT_EQ(r.status, QuestionStatus::kLockedPending);
  EXPECT_EQ(r.locked_case_ids, Lines{"c2"});
  EXPECT_TRUE(h.executor.trace.empty());
  EXPECT_TRUE(h.log.empty());
}

TEST(RunQuestion, UnlockedAnswerIsUsed) {
  Harness h;
  answer_all(h.executor);
  auto q = three_case_question();
  q.cases[1].locked = true;
  q.cases[1].expected_lines.reset();
  h.state.mark_unlocked(case_key("q1", "c2"), {"two"});
  auto r = h.run(q);
  EXPECT_EQ(r.status, QuestionStatus::kRan);
  EXPECT_TRUE(r.passed());
  EXPECT_EQ(h.executor.trace.size(), 4u);
}

TEST(RunQuestion, VelocityDeniedRunsNothingButLogs) {
  Harness h;
  h.limiter = telemetry::VelocityLimiter(telemetry::VelocityConfig{2, 900});
  answer_all(h.executor);
  auto q = three_case_question();
  h.run(q, 0);
  h.run(q, 10);
  h.executor.trace.clear();
  auto r = h.run(q, 20);
  EXPECT_EQ(r.status, QuestionStatus::kVelocityDenied);
  EXPECT_EQ(r.retry_after_seconds, 880);
  EXPECT_TRUE(h.executor.trace.empty());
  ASSERT_EQ(h.log.size(), 3u);
  EXPECT_EQ(h.log.events()[2].kind(), telemetry::EventKind::kVelocityDenied);
  EXPECT_EQ(h.run(q, 900).status, QuestionStatus::kRan);
}

TEST(RunQuestion, OnEventSeesEveryAppendedEvent) {
  Harness h;
  answer_all(h.executor);
  std::vector<telemetry::AttemptEvent> seen;
  h.ctx.on_event = [&](const telemetry::AttemptEvent& e) { seen.push_back(e); };
  h.run(three_case_question());
  EXPECT_EQ(seen, h.log.events());
}

TEST(RunQuestion, DeterministicSerialization) {
  Harness a, b;
  answer_all(a.executor);
  answer_all(b.executor);
  a.executor.answer("in2", "too\nmany\n");
  b.executor.answer("in2", "too\nmany\n");
  EXPECT_EQ(a.run(three_case_question()).to_json().dump(), b.run(three_case_question()).to_json().dump());
}

TEST(RunQuestion, LaunchErrorLeavesContextUsable) {
  telemetry::VelocityLimiter limiter{telemetry::VelocityConfig{}};
  unlock::UnlockState state("hw1");
  RunContext ctx;
  ctx.student_id = "s1";
  ctx.assignment_id = "hw1";
  auto q = three_case_question();
  EXPECT_THROW(run_question(q, SubjectCommand::parse("/nonexistent/subject"), state, limiter, 1, ctx), LaunchError);
  EXPECT_EQ(ctx.log, nullptr);
}

// --- score -------------------------------------------------------------------------

namespace {

QuestionResult ran(std::string id, bool pass_ungated, bool pass_gated) {
  QuestionResult r;
  r.question_id = std::move(id);
  r.cases = {{"c1", Pass{}}, {"c2", pass_ungated ? Outcome{Pass{}} : Outcome{Fail{{"x"}, 0}}}};
  r.gated_cases = {{"g1", pass_gated ? Outcome{Pass{}} : Outcome{Fail{{"y"}, 0}}}};
  return r;
}

TestSpec points_spec(const std::vector<double>& points) {
  TestSpec spec;
  spec.assignment_id = "hw";
  for (std::size_t i = 0; i < points.size(); ++i) {
    Question q;
    q.id = "q" + std::to_string(i + 1);
    q.points = points[i];
    q.cases = {make_case("c1", "", {}), make_case("c2", "", {})};
    q.gated_cases = {make_case("g1", "", {})};
    spec.questions.push_back(q);
  }
  return spec;
}

}  // namespace

TEST(Score, TwoPassingQuestions) {
  auto report = score(points_spec({3, 5}), {ran("q1", true, true), ran("q2", true, true)});
  EXPECT_DOUBLE_EQ(report.total_points, 8);
  EXPECT_DOUBLE_EQ(report.total_possible, 8);
}

TEST(Score, GatedFailureIsZero) {
  auto report = score(points_spec({3}), {ran("q1", true, false)});
  EXPECT_DOUBLE_EQ(report.questions[0].points_awarded, 0);
  EXPECT_EQ(report.questions[0].passed_count, 2u);
  EXPECT_EQ(report.questions[0].total_count, 3u);
}

TEST(Score, UnknownQuestionThrows) {
  EXPECT_THROW(score(points_spec({1}), {ran("q9", true, true)}), Error);
}

TEST(Score, UnattemptedIsZero) {
  auto report = score(points_spec({2, 2}), {ran("q1", true, true)});
  EXPECT_DOUBLE_EQ(report.total_points, 2);
  EXPECT_FALSE(report.questions[1].attempted);
}

TEST(Score, PartialCreditOption) {
  auto report = score(points_spec({3}), {ran("q1", true, false)}, {true});
  EXPECT_DOUBLE_EQ(report.questions[0].points_awarded, 2.0);
}

// Ten questions with mixed outcomes; expected total summed by hand:
// passing: q1(1) q3(3) q4(4) q7(7) q10(10) = 25.
TEST(Score, TenQuestionHandSum) {
  auto spec = points_spec({1, 2, 3, 4, 5, 6, 7, 8, 9, 10});
  std::vector<QuestionResult> results = {
      ran("q1", true, true),  ran("q2", false, true), ran("q3", true, true), ran("q4", true, true),
      ran("q5", true, false), ran("q6", false, false), ran("q7", true, true), ran("q8", false, true),
      ran("q10", true, true)};
  QuestionResult locked;
  locked.question_id = "q9";
  locked.status = QuestionStatus::kLockedPending;
  results.push_back(locked);
  auto report = score(spec, results);
  EXPECT_DOUBLE_EQ(report.total_points, 25);
  EXPECT_DOUBLE_EQ(report.total_possible, 55);
  for (const auto& q : report.questions) {
    EXPECT_GE(q.points_awarded, 0);
    EXPECT_LE(q.points_awarded, q.points_possible);
  }
}

TEST(RunCase, CaseInsensitiveFlagFoldsAscii) {
  cftest::FakeExecutor ex;
  ex.answer("x", "HeLLo\n");
  auto c = make_case("c", "x", {"hello"});
  EXPECT_FALSE(run_case(c, SubjectCommand{{"s"}, ""}, ex).passed());
  c.case_insensitive = true;
  EXPECT_TRUE(run_case(c, SubjectCommand{{"s"}, ""}, ex).passed());
}
