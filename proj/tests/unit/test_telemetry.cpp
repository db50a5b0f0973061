#include <gtest/gtest.h>

#include <unistd.h>

#include <functional>
#include <set>

#include "courseforge/common/digest.hpp"
#include "courseforge/common/error.hpp"
#include "courseforge/common/rng.hpp"
#include "courseforge/telemetry/analytics.hpp"
#include "courseforge/telemetry/backup.hpp"
#include "courseforge/telemetry/log.hpp"
#include "courseforge/telemetry/snapshot.hpp"
#include "courseforge/telemetry/velocity.hpp"
#include "httplib.h"
#include "test_support.hpp"
#include "velocity_oracle.hpp"

using namespace courseforge;
using namespace courseforge::telemetry;

namespace {

AttemptEvent run_event(std::string student, std::string question, std::int64_t t, bool passed = true) {
  return {std::move(student), "hw1", std::move(question), t, RunPayload{passed}};
}

Snapshot make_snapshot(const std::string& student, const std::string& content, std::int64_t at = 1) {
  Snapshot s;
  s.student_id = student;
  s.assignment_id = "hw1";
  s.created_at = at;
  s.files = {{"main.py", content}};
  s.snapshot_hash = hash_files(s.files);
  s.analytics = {"q1", 3, true};
  return s;
}

class CountingTransport final : public BackupTransport {
 public:
  explicit CountingTransport(BackupStore& store) : store_(store) {}
  PutOutcome post(const Snapshot& s) override {
    ++requests;
    if (fail_after && requests > *fail_after) throw Error(ErrorCategory::kRetryable, "network", "down");
    return store_.put(s);
  }
  int requests = 0;
  std::optional<int> fail_after;

 private:
  BackupStore& store_;
};

}  // namespace

// --- log -------------------------------------------------------------------------------

TEST(AttemptLog, AppendAndRegression) {
  AttemptLog log;
  log = record_attempt(log, run_event("s", "q", 5));
  EXPECT_EQ(log.size(), 1u);
  log.append(run_event("s", "q", 5));
  try {
    log.append(run_event("s", "q", 4));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), "timestamp-regression");
  }
  EXPECT_EQ(log.size(), 2u);
}

TEST(AttemptLog, AllPayloadKindsRoundTrip) {
  AttemptLog log;
  log.append(run_event("s", "q", 1, false));
  log.append({"s", "hw1", "q", 2, UnlockPayload{3, "q/c", true}});
  log.append({"s", "hw1", "q", 3, BackupPayload{"abc"}});
  log.append({"s", "hw1", "q", 4, DeniedPayload{17}});
  auto back = AttemptLog::from_jsonl(log.to_jsonl());
  EXPECT_EQ(back.events(), log.events());
  EXPECT_EQ(to_string(back.events()[3].kind()), "VelocityDenied");
}

TEST(AttemptLog, ThousandEventReplayIsIdentical) {
  SeededRng rng(11);
  AttemptLog log;
  std::int64_t t = 0;
  std::string prefix;
  for (int i = 0; i < 1000; ++i) {
    t += static_cast<std::int64_t>(rng.below(5));
    std::string s = "s" + std::to_string(rng.below(20));
    std::string q = "q" + std::to_string(rng.below(4));
    switch (rng.below(4)) {
      case 0: log.append(run_event(s, q, t, rng.below(2) == 0)); break;
      case 1: log.append({s, "hw1", q, t, UnlockPayload{static_cast<std::int64_t>(rng.below(9)), q + "/c", rng.below(2) == 0}}); break;
      case 2: log.append({s, "hw1", q, t, BackupPayload{to_hex(sha256(std::to_string(i)))}}); break;
      default: log.append({s, "hw1", q, t, DeniedPayload{static_cast<std::int64_t>(rng.below(900))}}); break;
    }
    auto text = log.to_jsonl();
    ASSERT_EQ(text.compare(0, prefix.size(), prefix), 0) << "append-only violated at " << i;
    prefix = std::move(text);
  }
  EXPECT_EQ(AttemptLog::from_jsonl(prefix).to_jsonl(), prefix);
}

TEST(AttemptLog, FileAppendAndLoad) {
  cftest::TempDir dir;
  auto path = (dir / "log.jsonl").string();
  EXPECT_TRUE(AttemptLog::load(path).empty());
  append_to_file(path, run_event("a", "q1", 1));
  append_to_file(path, run_event("b", "q1", 2));
  auto log = AttemptLog::load(path);
  ASSERT_EQ(log.size(), 2u);
  EXPECT_EQ(log.events()[1].student_id, "b");
}

TEST(AttemptLog, MalformedLineRejected) {
  EXPECT_THROW(AttemptLog::from_jsonl("{not json}\n"), Error);
  EXPECT_THROW(AttemptLog::from_jsonl(R"({"kind":"Nope","student_id":"s","assignment_id":"a","question_id":"q","timestamp":1})" "\n"),
               Error);
}

// --- velocity ---------------------------------------------------------------------------

TEST(Velocity, FixedWindowExamples) {
  VelocityConfig cfg{2, 900};
  AttemptLog log;
  EXPECT_TRUE(check_velocity(log, cfg, "s", "q", 0).allowed);
  log.append(run_event("s", "q", 0));
  EXPECT_TRUE(check_velocity(log, cfg, "s", "q", 10).allowed);
  log.append(run_event("s", "q", 10));
  auto d = check_velocity(log, cfg, "s", "q", 20);
  EXPECT_FALSE(d.allowed);
  EXPECT_EQ(d.retry_after_seconds, 880);
  log.append({"s", "hw1", "q", 20, DeniedPayload{880}});
  EXPECT_TRUE(check_velocity(log, cfg, "s", "q", 901).allowed);
  EXPECT_TRUE(check_velocity(log, cfg, "s", "q", 900).allowed);
  EXPECT_FALSE(check_velocity(log, cfg, "s", "q", 899).allowed);
}

TEST(Velocity, ScopedToStudentAndQuestion) {
  VelocityConfig cfg{1, 100};
  AttemptLog log;
  log.append(run_event("s", "q1", 0));
  EXPECT_FALSE(check_velocity(log, cfg, "s", "q1", 1).allowed);
  EXPECT_TRUE(check_velocity(log, cfg, "s", "q2", 1).allowed);
  EXPECT_TRUE(check_velocity(log, cfg, "t", "q1", 1).allowed);
}

TEST(Velocity, InvalidConfig) {
  EXPECT_THROW(VelocityLimiter(VelocityConfig{0, 10}), Error);
  EXPECT_THROW(VelocityLimiter(VelocityConfig{1, 0}), Error);
}

// Exhaustive agreement with the reference simulator on short sequences.
TEST(Velocity, MatchesOracleExhaustively) {
  const std::int64_t window = 2;
  for (int max_attempts = 1; max_attempts <= 3; ++max_attempts) {
    VelocityConfig cfg{max_attempts, window};
    std::vector<std::int64_t> times;
    long disagreements = 0, checked = 0;
    std::function<void(std::int64_t)> walk = [&](std::int64_t from) {
      if (!times.empty()) {
        auto expected = cftest::oracle_decisions(times, max_attempts, window);
        AttemptLog log;
        for (std::size_t i = 0; i < times.size(); ++i) {
          auto d = check_velocity(log, cfg, "s", "q", times[i]);
          ++checked;
          if (d.allowed != expected[i].allowed || d.retry_after_seconds != expected[i].retry_after) ++disagreements;
          if (d.allowed) log.append(run_event("s", "q", times[i]));
          else log.append({"s", "hw1", "q", times[i], DeniedPayload{d.retry_after_seconds}});
        }
      }
      if (times.size() == 6) return;
      for (std::int64_t t = from; t <= 4 * window; ++t) {
        times.push_back(t);
        walk(t);
        times.pop_back();
      }
    };
    walk(0);
    EXPECT_EQ(disagreements, 0) << "max_attempts " << max_attempts << " over " << checked << " checks";
  }
}

TEST(Velocity, NeverMoreThanMaxAllowedPerWindow) {
  SeededRng rng(3);
  VelocityConfig cfg{3, 60};
  AttemptLog log;
  std::vector<std::int64_t> allowed;
  std::int64_t t = 0;
  for (int i = 0; i < 3000; ++i) {
    t += static_cast<std::int64_t>(rng.below(15));
    auto d = check_velocity(log, cfg, "s", "q", t);
    if (d.allowed) {
      allowed.push_back(t);
      log.append(run_event("s", "q", t));
    } else {
      ASSERT_GT(d.retry_after_seconds, 0);
      ASSERT_LE(d.retry_after_seconds, 60);
    }
  }
  // Fixed windows: the count within any window anchor never exceeds max.
  std::size_t i = 0;
  while (i < allowed.size()) {
    std::size_t j = i;
    while (j < allowed.size() && allowed[j] < allowed[i] + 60) ++j;
    ASSERT_LE(j - i, 3u);
    i = j;
  }
}

// --- snapshot ------------------------------------------------------------------------------

TEST(Snapshot, EmptyTreeHash) {
  cftest::TempDir dir;
  auto s = snapshot(dir.path(), {"s", "hw1", 1, {}}, {});
  EXPECT_TRUE(s.files.empty());
  EXPECT_EQ(s.snapshot_hash, "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
}

// Reference value from Python: sha256 over len64be(path)+path+len64be(bytes)+bytes.
TEST(Snapshot, HashMatchesReferenceScript) {
  FileSet files{{"a.py", "print(1)\n"}, {"dir/b.txt", ""}};
  EXPECT_EQ(hash_files(files), "3ee912406a9e0149a875525cfc6da238bd986b148c4a2f26c3d302b2caefce75");
}

TEST(Snapshot, ReadsTreeSkippingStateDirs) {
  cftest::TempDir dir;
  cftest::write(dir / "a.py", "print(1)\n");
  cftest::write(dir / "dir/b.txt", "");
  cftest::write(dir / ".courseforge/attempts.jsonl", "x");
  cftest::write(dir / ".git/HEAD", "ref");
  auto s1 = snapshot(dir.path(), {"s", "hw1", 1, {".courseforge", ".git"}}, {});
  auto s2 = snapshot(dir.path(), {"s", "hw1", 2, {".courseforge", ".git"}}, {});
  EXPECT_EQ(s1.files.size(), 2u);
  EXPECT_EQ(s1.snapshot_hash, "3ee912406a9e0149a875525cfc6da238bd986b148c4a2f26c3d302b2caefce75");
  EXPECT_EQ(s1.snapshot_hash, s2.snapshot_hash);
}

TEST(Snapshot, OneByteFlipChangesHash) {
  SeededRng rng(8);
  for (int trial = 0; trial < 200; ++trial) {
    FileSet files;
    int n = 1 + static_cast<int>(rng.below(4));
    for (int f = 0; f < n; ++f) {
      std::string bytes(1 + rng.below(64), '\0');
      for (auto& b : bytes) b = static_cast<char>(rng.below(256));
      files["f" + std::to_string(f)] = bytes;
    }
    auto base = hash_files(files);
    auto it = std::next(files.begin(), static_cast<long>(rng.below(files.size())));
    auto pos = rng.below(it->second.size());
    it->second[pos] = static_cast<char>(it->second[pos] ^ (1 + rng.below(255)));
    ASSERT_NE(hash_files(files), base);
  }
}

TEST(Snapshot, PathAndContentBoundariesAreUnambiguous) {
  EXPECT_NE(hash_files({{"ab", "c"}}), hash_files({{"a", "bc"}}));
}

TEST(Snapshot, JsonRoundTripVerifiesHash) {
  auto s = make_snapshot("s1", std::string("bin\0ary", 7));
  EXPECT_EQ(Snapshot::from_json(s.to_json()), s);
  auto j = s.to_json();
  j["snapshot_hash"] = std::string(64, '0');
  EXPECT_THROW(Snapshot::from_json(j), Error);
}

TEST(Snapshot, UnreadableFileNamesPath) {
  if (::geteuid() == 0) GTEST_SKIP() << "permission bits do not restrict root";
  cftest::TempDir dir;
  cftest::write(dir / "secret.txt", "x");
  std::filesystem::permissions(dir / "secret.txt", std::filesystem::perms::none);
  try {
    read_tree(dir.path(), {});
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("secret.txt"), std::string::npos);
  }
}

TEST(Snapshot, AnalyticsFromLog) {
  AttemptLog log;
  log.append(run_event("s1", "q1", 1, false));
  log.append(run_event("s2", "q2", 2, true));
  log.append(run_event("s1", "q3", 3, true));
  log.append({"s1", "hw1", "q3", 4, DeniedPayload{5}});
  auto a = analytics_from_log(log, "s1", "hw1");
  EXPECT_EQ(a.current_question, "q3");
  EXPECT_EQ(a.run_count_so_far, 2);
  EXPECT_EQ(a.last_result_passed, std::optional<bool>(true));
  EXPECT_EQ(analytics_from_log(log, "nobody", "hw1").run_count_so_far, 0);
}

// --- backup store and sync -----------------------------------------------------------------

TEST(BackupStore, DedupeAndCardinality) {
  cftest::TempDir dir;
  BackupStore store(dir / "store");
  auto a = make_snapshot("s1", "v1");
  EXPECT_EQ(store.put(a), PutOutcome::kAccepted);
  EXPECT_EQ(store.put(a), PutOutcome::kDuplicate);
  for (int i = 2; i <= 5; ++i) store.put(make_snapshot("s1", "v" + std::to_string(i), i));
  EXPECT_EQ(store.size(), 5u);
  EXPECT_EQ(store.list("s1").size(), 5u);
  EXPECT_TRUE(store.list("s2").empty());
  BackupStore reopened(dir / "store");
  EXPECT_EQ(reopened.size(), 5u);
  EXPECT_TRUE(reopened.contains(a.snapshot_hash));
}

TEST(Sync, OptedOutSendsNothing) {
  cftest::TempDir dir;
  BackupStore store(dir / "store");
  CountingTransport t(store);
  auto receipt = sync({make_snapshot("s", "x")}, t, true);
  EXPECT_TRUE(receipt.skipped);
  EXPECT_EQ(t.requests, 0);
  EXPECT_EQ(store.size(), 0u);
}

TEST(Sync, SecondPushIsDuplicateAndIdempotent) {
  cftest::TempDir dir;
  BackupStore store(dir / "store");
  CountingTransport t(store);
  std::vector<Snapshot> snaps{make_snapshot("s", "a"), make_snapshot("s", "b")};
  auto r1 = sync(snaps, t, false);
  auto index_after_first = cftest::slurp(dir / "store/index.json");
  auto r2 = sync(snaps, t, false);
  EXPECT_EQ(r1.accepted.size(), 2u);
  EXPECT_EQ(r2.duplicate.size(), 2u);
  EXPECT_EQ(cftest::slurp(dir / "store/index.json"), index_after_first);
}

TEST(Outbox, FailureKeepsRemainderQueued) {
  cftest::TempDir dir;
  BackupStore store(dir / "store");
  Outbox outbox(dir / "outbox");
  for (int i = 0; i < 3; ++i) outbox.enqueue(make_snapshot("s", "v" + std::to_string(i), i));
  EXPECT_EQ(outbox.pending().size(), 3u);
  CountingTransport t(store);
  t.fail_after = 1;
  EXPECT_THROW(sync_outbox(outbox, t, false), Error);
  EXPECT_EQ(outbox.pending().size(), 2u);
  t.fail_after.reset();
  auto r = sync_outbox(outbox, t, false);
  EXPECT_EQ(r.accepted.size(), 2u);
  EXPECT_TRUE(outbox.pending().empty());
  EXPECT_EQ(store.size(), 3u);
}

TEST(BackupServer, HttpRoundTrip) {
  cftest::TempDir dir;
  BackupStore store(dir / "store");
  BackupServer server(store, "sekrit");
  int port = server.start("127.0.0.1", 0);
  std::string endpoint = "http://127.0.0.1:" + std::to_string(port);

  HttpBackupTransport transport(endpoint, "sekrit");
  auto snap = make_snapshot("s9", "hello");
  EXPECT_EQ(transport.post(snap), PutOutcome::kAccepted);
  EXPECT_EQ(transport.post(snap), PutOutcome::kDuplicate);

  httplib::Client client("127.0.0.1", port);
  auto res = client.Get("/api/backups/s9", {{"Authorization", "Bearer sekrit"}});
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 200);
  auto list = nlohmann::json::parse(res->body);
  ASSERT_EQ(list.size(), 1u);
  EXPECT_EQ(list[0]["snapshot_hash"], snap.snapshot_hash);
  EXPECT_EQ(list[0]["analytics"]["current_question"], "q1");

  auto unauth = client.Get("/api/backups/s9");
  ASSERT_TRUE(unauth);
  EXPECT_EQ(unauth->status, 401);
  HttpBackupTransport wrong(endpoint, "nope");
  EXPECT_THROW(wrong.post(snap), Error);

  auto bad = client.Post("/api/backups", {{"Authorization", "Bearer sekrit"}}, "{}", "application/json");
  ASSERT_TRUE(bad);
  EXPECT_EQ(bad->status, 400);
  server.stop();
  EXPECT_GE(server.request_count(), 5u);
}

TEST(BackupServer, UnreachableIsRetryable) {
  HttpBackupTransport transport("http://127.0.0.1:1", "");
  try {
    transport.post(make_snapshot("s", "x"));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.category(), ErrorCategory::kRetryable);
    EXPECT_EQ(e.code(), "network");
  }
}

// --- analytics ----------------------------------------------------------------------------

TEST(Analytics, EmptyAndSmall) {
  EXPECT_TRUE(analytics_summary(AttemptLog{}).empty());
  AttemptLog log;
  log.append(run_event("a", "q1", 1, true));
  log.append(run_event("b", "q1", 2, false));
  log.append(run_event("a", "q1", 3, true));
  auto s = analytics_summary(log);
  const auto& q = s.at({"hw1", "q1"});
  EXPECT_EQ(q.attempts, 3);
  EXPECT_EQ(q.passed, 2);
  EXPECT_DOUBLE_EQ(q.pass_rate, 2.0 / 3.0);
  EXPECT_EQ(q.distinct_students, 2);
}

TEST(Analytics, TenThousandEventRecount) {
  SeededRng rng(77);
  AttemptLog log;
  for (int i = 0; i < 10000; ++i) {
    std::string s = "s" + std::to_string(rng.below(50));
    std::string q = "q" + std::to_string(rng.below(6));
    switch (rng.below(3)) {
      case 0: log.append({s, "hw1", q, i, DeniedPayload{1}}); break;
      case 1: log.append({s, "hw1", q, i, UnlockPayload{1, q + "/c", true}}); break;
      default: log.append(run_event(s, q, i, rng.below(3) == 0)); break;
    }
  }
  auto summary = analytics_summary(log);
  for (const auto& [key, act] : summary) {
    std::int64_t attempts = 0, passed = 0, denials = 0;
    std::set<std::string> students;
    for (const auto& e : log.events()) {
      if (e.assignment_id != key.first || e.question_id != key.second) continue;
      if (const auto* r = std::get_if<RunPayload>(&e.payload)) {
        ++attempts;
        passed += r->passed;
        students.insert(e.student_id);
      } else if (std::holds_alternative<DeniedPayload>(e.payload)) {
        ++denials;
      }
    }
    EXPECT_EQ(act.attempts, attempts);
    EXPECT_EQ(act.passed, passed);
    EXPECT_EQ(act.denials, denials);
    EXPECT_EQ(act.distinct_students, static_cast<std::int64_t>(students.size()));
  }
  EXPECT_EQ(summary.size(), 6u);
}
