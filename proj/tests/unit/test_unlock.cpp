#include <gtest/gtest.h>

#include <set>
#include <sstream>

#include "courseforge/common/digest.hpp"
#include "courseforge/testkit/normalize.hpp"
#include "courseforge/testkit/spec.hpp"
#include "courseforge/unlock/session.hpp"
#include "courseforge/unlock/state.hpp"
#include "courseforge/unlock/vault.hpp"
#include "test_support.hpp"

using namespace courseforge;
using namespace courseforge::unlock;
using Lines = std::vector<std::string>;

namespace {

Salt salt_of(std::uint8_t start) {
  Salt s{};
  for (std::size_t i = 0; i < s.size(); ++i) s[i] = static_cast<std::uint8_t>(start + i);
  return s;
}

SaltSource counting_salts() {
  auto n = std::make_shared<std::uint8_t>(0);
  return [n] { return salt_of((*n)++); };
}

testkit::TestSpec two_locked_spec() {
  return testkit::parse_spec(R"J({"assignment_id":"hw2","questions":[
    {"id":"q1","points":1,"cases":[
      {"id":"a","prompt":"f(1)","expected_lines":["HELLO","WORLD"],"locked":true},
      {"id":"b","prompt":"f(2)","expected_lines":["plain"]}]},
    {"id":"q2","points":1,"cases":[
      {"id":"mc","prompt":"pick","expected_lines":["beta"],"locked":true,"choices":["alpha","beta","gamma","delta"]},
      {"id":"ci","prompt":"yes?","expected_lines":["Yes"],"locked":true,"case_insensitive":true}]}]})J");
}

class ScriptedIo final : public UnlockIo {
 public:
  explicit ScriptedIo(std::vector<std::optional<std::string>> answers) : answers_(std::move(answers)) {}
  void present(const UnlockPrompt& p) override { prompts.push_back(p); }
  std::optional<std::string> read_answer() override {
    if (next_ >= answers_.size()) return std::nullopt;
    return answers_[next_++];
  }
  void feedback(bool correct) override { feedbacks.push_back(correct); }

  std::vector<UnlockPrompt> prompts;
  std::vector<bool> feedbacks;

 private:
  std::vector<std::optional<std::string>> answers_;
  std::size_t next_ = 0;
};

struct Session {
  VaultBuild build = build_vault(two_locked_spec(), counting_salts());
  std::vector<telemetry::AttemptEvent> events;
  SessionContext ctx;
  Session() {
    ctx.student_id = "s1";
    ctx.on_event = [this](const telemetry::AttemptEvent& e) { events.push_back(e); };
    ctx.clock = [] { return std::int64_t{50}; };
  }
  UnlockState run(UnlockIo& io, UnlockState state = UnlockState("hw2")) {
    return unlock_session(build.vault, build.student_spec, std::move(state), io, ctx);
  }
};

}  // namespace

// --- seal ----------------------------------------------------------------------

// Reference digests from Python hashlib: sha256(salt + "\n".join(lines)).
TEST(Seal, MatchesReferenceScript) {
  EXPECT_EQ(to_hex(seal_answer({"42"}, Salt{}).digest), "3076cf22759f6d8e5b10a51e798f9d9a70deb65546b5c95096962772c3e592f4");
  EXPECT_EQ(to_hex(seal_answer({"3", "foo"}, salt_of(0)).digest),
            "0433e9660fe0cbcbe09dfabde46bfc91872c08d00ee885b65870358b3a6d3e09");
}

TEST(Seal, DeterministicAndSalted) {
  EXPECT_EQ(seal_answer({"x"}, salt_of(1)).digest, seal_answer({"x"}, salt_of(1)).digest);
  EXPECT_NE(seal_answer({"x"}, salt_of(1)).digest, seal_answer({"x"}, salt_of(2)).digest);
  EXPECT_NE(random_salt(), random_salt());
}

// --- build_vault ---------------------------------------------------------------------

TEST(BuildVault, NoLockedCases) {
  auto spec = testkit::parse_spec(R"({"assignment_id":"hw","questions":[{"id":"q","points":1,"cases":[
    {"id":"c","expected_lines":["1"]}]}]})");
  auto b = build_vault(spec);
  EXPECT_TRUE(b.vault.entries.empty());
  EXPECT_EQ(b.student_spec, spec);
}

TEST(BuildVault, OneEntryPerLockedCase) {
  auto b = build_vault(two_locked_spec(), counting_salts());
  EXPECT_EQ(b.vault.entries.size(), 3u);
  EXPECT_TRUE(b.vault.entries.contains("q1/a"));
  EXPECT_TRUE(b.vault.entries.contains("q2/mc"));
  EXPECT_FALSE(b.student_spec.questions[0].cases[0].expected_lines.has_value());
  EXPECT_EQ(b.student_spec.questions[0].cases[1].expected_lines, Lines{"plain"});
  EXPECT_EQ(b.vault.hash_alg, "sha256");
}

TEST(BuildVault, LockedCaseWithoutAnswerRejected) {
  auto spec = two_locked_spec();
  spec.questions[0].cases[0].expected_lines.reset();
  EXPECT_THROW(build_vault(spec), testkit::SpecError);
}

TEST(BuildVault, SaltsAreFresh) {
  auto b = build_vault(two_locked_spec());
  std::set<std::string> salts;
  for (const auto& [k, e] : b.vault.entries) salts.insert(e.salt_hex);
  EXPECT_EQ(salts.size(), b.vault.entries.size());
}

// Scanner oracle: no substring longer than 3 characters of any locked answer
// appears in the student artifacts.
TEST(BuildVault, StudentArtifactsHideAnswersOnCorpus) {
  auto spec = testkit::load_spec(cftest::fixture("specs/secrecy_corpus.json").string());
  auto b = build_vault(spec);
  std::string artifacts = testkit::serialize_spec(b.student_spec, testkit::Audience::kStudent) +
                          b.vault.to_json().dump() + UnlockState("lab7").to_json().dump();
  std::size_t locked = 0, hits = 0;
  for (const auto& q : spec.questions) {
    for (const auto& c : q.cases) {
      if (!c.locked) continue;
      ++locked;
      std::string answer = testkit::join_lines(*c.expected_lines);
      for (std::size_t i = 0; i + 4 <= answer.size(); ++i) {
        if (artifacts.find(answer.substr(i, 4)) != std::string::npos) ++hits;
      }
    }
  }
  EXPECT_EQ(locked, 50u);
  EXPECT_EQ(hits, 0u);
}

TEST(Vault, JsonRoundTripAndFile) {
  cftest::TempDir dir;
  auto b = build_vault(two_locked_spec(), counting_salts());
  EXPECT_EQ(UnlockVault::from_json(b.vault.to_json()), b.vault);
  b.vault.save((dir / "v.json").string());
  EXPECT_EQ(UnlockVault::load((dir / "v.json").string()), b.vault);
}

// --- verify ----------------------------------------------------------------------

TEST(Verify, ExactWhitespaceAndWrong) {
  auto b = build_vault(two_locked_spec(), counting_salts());
  EXPECT_TRUE(verify_attempt(b.vault, "q1/a", Lines{"HELLO", "WORLD"}));
  EXPECT_TRUE(verify_attempt(b.vault, "q1/a", std::string_view("HELLO  \r\nWORLD\t\n\n")));
  EXPECT_FALSE(verify_attempt(b.vault, "q1/a", Lines{"HELLO", "WORLDS"}));
  EXPECT_FALSE(verify_attempt(b.vault, "q1/a", Lines{"hello", "world"}));
  EXPECT_THROW(verify_attempt(b.vault, "q1/zzz", Lines{"x"}), Error);
}

TEST(Verify, CaseInsensitiveEntry) {
  auto b = build_vault(two_locked_spec(), counting_salts());
  EXPECT_TRUE(verify_attempt(b.vault, "q2/ci", std::string_view("yES")));
  EXPECT_FALSE(verify_attempt(b.vault, "q2/ci", std::string_view("no")));
}

TEST(Verify, SingleCharacterPerturbationsFail) {
  auto b = build_vault(two_locked_spec(), counting_salts());
  std::string answer = "HELLO\nWORLD";
  for (std::size_t i = 0; i < answer.size(); ++i) {
    if (answer[i] == '\n') continue;
    std::string p = answer;
    p[i] = p[i] == 'Z' ? 'Y' : static_cast<char>(p[i] + 1);
    EXPECT_FALSE(verify_attempt(b.vault, "q1/a", std::string_view(p))) << p;
  }
}

// --- session ------------------------------------------------------------------------

TEST(Session, AlreadyUnlockedMeansNoPrompts) {
  Session s;
  UnlockState state("hw2");
  state.mark_unlocked("q1/a", {"HELLO", "WORLD"});
  state.mark_unlocked("q2/mc", {"beta"});
  state.mark_unlocked("q2/ci", {"yes"});
  ScriptedIo io({});
  auto out = s.run(io, state);
  EXPECT_EQ(out, state);
  EXPECT_TRUE(io.prompts.empty());
  EXPECT_TRUE(s.events.empty());
}

TEST(Session, CorrectFirstTry) {
  Session s;
  ScriptedIo io({"HELLO\nWORLD"});
  auto out = s.run(io);
  EXPECT_TRUE(out.is_unlocked("q1/a"));
  EXPECT_EQ(out.attempts("q1/a"), 1);
  EXPECT_EQ(*out.answer("q1/a"), (Lines{"HELLO", "WORLD"}));
  // Aborted at the next prompt; partial progress kept.
  EXPECT_FALSE(out.is_unlocked("q2/mc"));
  EXPECT_EQ(out.answer("q2/mc"), nullptr);
}

// Replay oracle over the transcript: wrong, wrong, right.
TEST(Session, ScriptedWrongWrongRight) {
  Session s;
  ScriptedIo io({"HELLO", "HELLO\nWORD", "HELLO\nWORLD"});
  auto out = s.run(io);
  EXPECT_EQ(out.attempts("q1/a"), 3);
  EXPECT_TRUE(out.is_unlocked("q1/a"));
  EXPECT_EQ(io.feedbacks, (std::vector<bool>{false, false, true}));
  ASSERT_EQ(s.events.size(), 3u);
  for (std::size_t i = 0; i < 3; ++i) {
    const auto& p = std::get<telemetry::UnlockPayload>(s.events[i].payload);
    EXPECT_EQ(p.attempt_no, static_cast<std::int64_t>(i + 1));
    EXPECT_EQ(p.case_id, "q1/a");
    EXPECT_EQ(p.correct, i == 2);
    EXPECT_EQ(s.events[i].question_id, "q1");
    EXPECT_EQ(s.events[i].timestamp, 50);
  }
}

TEST(Session, MultipleChoiceByNumberAndText) {
  Session s;
  auto shown = shuffle_choices(s.build.student_spec.questions[1].cases[0], "hw2", "s1");
  auto beta = std::find(shown.begin(), shown.end(), "beta") - shown.begin() + 1;
  ScriptedIo io({"HELLO\nWORLD", std::to_string(beta), "YES"});
  auto out = s.run(io);
  EXPECT_TRUE(out.is_unlocked("q2/mc"));
  EXPECT_TRUE(out.is_unlocked("q2/ci"));
  ASSERT_EQ(io.prompts.size(), 3u);
  EXPECT_EQ(io.prompts[1].choices, shown);
  EXPECT_TRUE(io.prompts[0].choices.empty());
}

TEST(Session, VaultForOtherAssignmentRejected) {
  Session s;
  s.build.vault.assignment_id = "other";
  ScriptedIo io({});
  EXPECT_THROW(s.run(io), Error);
}

TEST(Session, StreamIoTranscript) {
  Session s;
  std::istringstream in("HELLO\nWORLD\n\nalpha\nbeta\nyes\n");
  std::ostringstream out;
  StreamIo io(in, out);
  auto state = s.run(io);
  EXPECT_TRUE(state.is_unlocked("q1/a"));
  EXPECT_TRUE(state.is_unlocked("q2/mc"));
  EXPECT_EQ(state.attempts("q2/mc"), 2);
  EXPECT_TRUE(state.is_unlocked("q2/ci"));
  EXPECT_NE(out.str().find("Not quite"), std::string::npos);
}

// --- shuffle ------------------------------------------------------------------------

TEST(Shuffle, SingleChoiceAndErrors) {
  testkit::TestCase c;
  c.id = "c";
  c.choices = Lines{"only"};
  EXPECT_EQ(shuffle_choices(c, "hw", "s"), Lines{"only"});
  c.choices.reset();
  EXPECT_THROW(shuffle_choices(c, "hw", "s"), Error);
}

TEST(Shuffle, DeterministicPermutation) {
  testkit::TestCase c;
  c.id = "c";
  c.choices = Lines{"a", "b", "c", "d", "e"};
  auto first = shuffle_choices(c, "hw", "student-1");
  EXPECT_EQ(shuffle_choices(c, "hw", "student-1"), first);
  EXPECT_EQ(std::multiset<std::string>(first.begin(), first.end()), std::multiset<std::string>(c.choices->begin(), c.choices->end()));
}

// Exhaustive scan: every choice lands in every position for some student.
TEST(Shuffle, EveryChoiceInEveryPosition) {
  testkit::TestCase c;
  c.id = "mc";
  c.choices = Lines{"w", "x", "y", "z"};
  std::set<std::pair<std::string, std::size_t>> seen;
  for (int i = 0; i < 100; ++i) {
    auto order = shuffle_choices(c, "hw", "student" + std::to_string(i));
    for (std::size_t pos = 0; pos < order.size(); ++pos) seen.insert({order[pos], pos});
  }
  EXPECT_EQ(seen.size(), 16u);
}

// --- state ----------------------------------------------------------------------------

TEST(State, AnswerPresentIffUnlocked) {
  UnlockState s("hw");
  s.record_attempt("q/c");
  EXPECT_FALSE(s.is_unlocked("q/c"));
  EXPECT_EQ(s.answer("q/c"), nullptr);
  s.mark_unlocked("q/c", {"x"});
  ASSERT_NE(s.answer("q/c"), nullptr);
  EXPECT_EQ(UnlockState::from_json(s.to_json()), s);
}

TEST(State, MergeIsMonotone) {
  UnlockState a("hw"), b("hw");
  a.mark_unlocked("q/c", {"x"});
  a.record_attempt("q/c");
  b.record_attempt("q/c");
  b.record_attempt("q/c");
  b.record_attempt("q/d");
  a.merge(b);
  EXPECT_TRUE(a.is_unlocked("q/c"));
  EXPECT_EQ(a.attempts("q/c"), 2);
  EXPECT_EQ(a.attempts("q/d"), 1);
}

TEST(StateFile, SaveNeverLosesUnlockedCases) {
  cftest::TempDir dir;
  auto path = (dir / "unlock.json").string();
  {
    UnlockStateFile f(path);
    EXPECT_TRUE(f.load("hw").cases().empty());
    UnlockState s("hw");
    s.mark_unlocked("q/c", {"x"});
    f.save(s);
  }
  {
    UnlockStateFile f(path);
    f.save(UnlockState("hw"));  // stale in-memory copy
  }
  UnlockStateFile f(path);
  auto s = f.load("hw");
  EXPECT_TRUE(s.is_unlocked("q/c"));
  EXPECT_THROW(f.load("other"), Error);
}
