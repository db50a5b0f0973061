#include "commands.hpp"

#include <algorithm>
#include <csignal>
#include <ctime>
#include <filesystem>
#include <iostream>
#include <pthread.h>

#include "courseforge/capsim/simulate.hpp"
#include "courseforge/capsim/trace.hpp"
#include "courseforge/common/error.hpp"
#include "courseforge/common/files.hpp"
#include "courseforge/ohq/analytics.hpp"
#include "courseforge/ohq/service.hpp"
#include "courseforge/seating/assign.hpp"
#include "courseforge/seating/audit.hpp"
#include "courseforge/seating/emails.hpp"
#include "courseforge/seating/roster.hpp"
#include "courseforge/telemetry/backup.hpp"
#include "courseforge/telemetry/log.hpp"
#include "courseforge/telemetry/snapshot.hpp"
#include "courseforge/testkit/question.hpp"
#include "courseforge/testkit/score.hpp"
#include "courseforge/unlock/session.hpp"
#include "courseforge/unlock/state.hpp"
#include "courseforge/unlock/vault.hpp"

namespace courseforge::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::int64_t wall_clock() { return static_cast<std::int64_t>(std::time(nullptr)); }

std::string pick(const std::string& flag, const std::string& fallback, const std::string& last) {
  if (!flag.empty()) return flag;
  return fallback.empty() ? last : fallback;
}

fs::path state_dir_of(const std::string& flag, const Config& config, const fs::path& workdir) {
  fs::path dir = flag.empty() ? fs::path(config.state_dir) : fs::path(flag);
  return dir.is_absolute() || !flag.empty() ? dir : workdir / dir;
}

struct StudentFiles {
  fs::path dir;
  std::string log;
  fs::path outbox;

  std::string unlock_state(const std::string& assignment_id) const {
    return (dir / ("unlock-" + assignment_id + ".json")).string();
  }
};

StudentFiles student_files(const fs::path& dir) {
  fs::create_directories(dir);
  return {dir, (dir / "attempts.jsonl").string(), dir / "outbox"};
}

// Appends to the in-memory log and the file, never going back in time.
void record(telemetry::AttemptLog& log, const std::string& path, telemetry::AttemptEvent event) {
  event.timestamp = std::max(event.timestamp, log.empty() ? event.timestamp : log.last_timestamp());
  log.append(event);
  telemetry::append_to_file(path, event);
}

void write_output(const std::string& path, const std::string& content, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << content;
  } else {
    write_file_atomic(path, content);
  }
}

// Pushes the outbox when an endpoint is known. Network trouble leaves the
// snapshots queued and is only a warning.
std::optional<telemetry::SyncReceipt> push_outbox(telemetry::Outbox& outbox, const std::string& endpoint,
                                                  const std::string& token, std::ostream& err) {
  if (endpoint.empty()) {
    err << "note: no backup endpoint configured; snapshot queued\n";
    return std::nullopt;
  }
  telemetry::HttpBackupTransport transport(endpoint, token);
  try {
    return telemetry::sync_outbox(outbox, transport, false);
  } catch (const Error& e) {
    if (e.category() != ErrorCategory::kRetryable) throw;
    err << "warning: backup deferred: " << e.what() << "\n";
    return std::nullopt;
  }
}

void log_pushes(const telemetry::SyncReceipt& receipt, telemetry::AttemptLog& log, const std::string& log_path,
                const std::string& student, const std::string& assignment, const std::string& question) {
  for (const auto* list : {&receipt.accepted, &receipt.duplicate}) {
    for (const auto& hash : *list) {
      record(log, log_path, {student, assignment, question, wall_clock(), telemetry::BackupPayload{hash}});
    }
  }
}

// Blocks until SIGINT or SIGTERM. Must be called with both signals already
// blocked (see block_stop_signals) so server threads inherit the mask.
void wait_for_stop_signal() {
  sigset_t set;
  sigemptyset(&set);
  sigaddset(&set, SIGINT);
  sigaddset(&set, SIGTERM);
  int sig = 0;
  sigwait(&set, &sig);
}

void block_stop_signals() {
  sigset_t set;
  sigemptyset(&set);
  sigaddset(&set, SIGINT);
  sigaddset(&set, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &set, nullptr);
}

// "A1", "AB12" -> (row, col), 0-based.
std::pair<int, int> parse_seat_label(const std::string& label) {
  std::size_t i = 0;
  int row = 0;
  while (i < label.size() && label[i] >= 'A' && label[i] <= 'Z') row = row * 26 + (label[i++] - 'A' + 1);
  std::string digits = label.substr(i);
  if (row == 0 || digits.empty() || digits.size() > 6 ||
      !std::all_of(digits.begin(), digits.end(), [](char c) { return c >= '0' && c <= '9'; }) || std::stoi(digits) < 1) {
    throw user_error("seat", "bad seat label '" + label + "' (expected e.g. B7)");
  }
  return {row - 1, std::stoi(digits) - 1};
}

capsim::TraceParams parse_gen(const std::string& text) {
  capsim::TraceParams p;
  std::size_t start = 0;
  while (start < text.size()) {
    auto end = text.find(',', start);
    if (end == std::string::npos) end = text.size();
    std::string item = text.substr(start, end - start);
    start = end + 1;
    auto eq = item.find('=');
    if (eq == std::string::npos) throw user_error("usage", "--gen expects key=value pairs, got '" + item + "'");
    std::string key = item.substr(0, eq);
    std::string value = item.substr(eq + 1);
    try {
      std::size_t used = 0;
      if (key == "n") {
        p.n_jobs = std::stoll(value, &used);
      } else if (key == "seed") {
        p.seed = std::stoull(value, &used);
      } else {
        double v = std::stod(value, &used);
        if (key == "deadline") p.deadline_at = v;
        else if (key == "sharpness") p.burst_sharpness = v;
        else if (key == "service") p.mean_service = v;
        else if (key == "ramp") p.ramp_fraction = v;
        else throw user_error("usage", "unknown --gen key '" + key + "' (n, deadline, sharpness, service, ramp, seed)");
      }
      if (used != value.size()) throw std::invalid_argument(value);
    } catch (const std::logic_error&) {
      throw user_error("usage", "bad number for --gen " + key + ": '" + value + "'");
    }
  }
  return p;
}

}  // namespace

std::string resolve_token(const std::string& flag, const Config& config) {
  if (!flag.empty()) return flag;
  if (const char* env = std::getenv("COURSEFORGE_TOKEN"); env && *env) return env;
  return config.token;
}

// --- grade -------------------------------------------------------------------

int grade_run(const GradeRunArgs& a, const Config& config, Streams io) {
  auto spec = testkit::load_spec(a.spec);
  std::string student = pick(a.student, config.student_id, "anonymous");
  fs::path workdir = a.workdir;
  auto files = student_files(state_dir_of(a.state_dir, config, workdir));

  std::vector<const testkit::Question*> selected;
  if (a.questions.empty()) {
    for (const auto& q : spec.questions) selected.push_back(&q);
  } else {
    for (const auto& id : a.questions) {
      const auto* q = spec.find_question(id);
      if (!q) throw user_error("unknown-question", "no question '" + id + "' in " + spec.assignment_id);
      selected.push_back(q);
    }
  }

  auto subject = testkit::SubjectCommand::parse(a.subject);
  if (subject.argv.empty()) throw user_error("usage", "--subject is empty");
  if (subject.working_dir.empty()) subject.working_dir = workdir.string();

  auto log = telemetry::AttemptLog::load(files.log);
  unlock::UnlockState unlocked = unlock::UnlockStateFile(files.unlock_state(spec.assignment_id)).load(spec.assignment_id);
  telemetry::VelocityLimiter limiter(config.velocity);

  testkit::RunContext ctx;
  ctx.student_id = student;
  ctx.assignment_id = spec.assignment_id;
  ctx.log = &log;
  ctx.on_event = [&](const telemetry::AttemptEvent& e) { telemetry::append_to_file(files.log, e); };

  std::vector<testkit::QuestionResult> results;
  bool all_passed = true;
  for (const auto* q : selected) {
    std::int64_t now = std::max(wall_clock(), log.empty() ? INT64_MIN : log.last_timestamp());
    auto r = testkit::run_question(*q, subject, unlocked, limiter, now, ctx);
    switch (r.status) {
      case testkit::QuestionStatus::kLockedPending: {
        std::string ids;
        for (const auto& id : r.locked_case_ids) ids += " " + id;
        io.err << q->id << ": locked cases pending (run `courseforge grade unlock`):" << ids << "\n";
        break;
      }
      case testkit::QuestionStatus::kVelocityDenied:
        io.err << q->id << ": too many attempts; retry in " << r.retry_after_seconds << "s\n";
        break;
      case testkit::QuestionStatus::kRan:
        break;
    }
    all_passed = all_passed && r.passed();
    results.push_back(std::move(r));
  }
  auto report = testkit::score(spec, results, {a.partial_credit});

  json backup = nullptr;
  if (a.no_backup) {
    backup = telemetry::SyncReceipt{true, {}, {}}.to_json();
  } else {
    telemetry::SnapshotOptions opts;
    opts.student_id = student;
    opts.assignment_id = spec.assignment_id;
    opts.created_at = wall_clock();
    opts.excluded_dirs.insert(files.dir.filename().string());
    auto analytics = telemetry::analytics_from_log(log, student, spec.assignment_id);
    auto snap = telemetry::snapshot(workdir, opts, analytics);
    telemetry::Outbox outbox(files.outbox);
    outbox.enqueue(snap);
    auto receipt = push_outbox(outbox, pick(a.endpoint, config.backup_endpoint, ""), resolve_token(a.token, config), io.err);
    if (receipt) {
      log_pushes(*receipt, log, files.log, student, spec.assignment_id, analytics.current_question);
      backup = receipt->to_json();
    }
  }

  if (a.json) {
    json rs = json::array();
    for (const auto& r : results) rs.push_back(r.to_json());
    io.out << json{{"results", rs}, {"score", report.to_json()}, {"backup", backup}}.dump(2) << "\n";
  } else {
    io.out << report.to_text();
  }
  return all_passed ? 0 : 1;
}

int grade_unlock(const GradeUnlockArgs& a, const Config& config, Streams io) {
  auto spec = testkit::load_spec(a.spec);
  auto vault = unlock::UnlockVault::load(a.vault);
  std::string student = pick(a.student, config.student_id, "anonymous");
  auto files = student_files(state_dir_of(a.state_dir, config, a.workdir));

  unlock::UnlockStateFile state_file(files.unlock_state(spec.assignment_id));
  auto log = telemetry::AttemptLog::load(files.log);

  unlock::StreamIo channel(io.in, io.out);
  unlock::SessionContext ctx;
  ctx.student_id = student;
  ctx.clock = wall_clock;
  ctx.on_event = [&](const telemetry::AttemptEvent& e) { record(log, files.log, e); };
  auto progress = unlock::unlock_session(vault, spec, state_file.load(spec.assignment_id), channel, ctx);
  state_file.save(progress);

  std::size_t total = 0, done = 0;
  for (const auto& q : spec.questions) {
    for (const auto& c : q.cases) {
      if (!c.locked) continue;
      ++total;
      if (progress.is_unlocked(testkit::case_key(q.id, c.id))) ++done;
    }
  }
  io.out << "unlocked " << done << "/" << total << " locked cases\n";
  return 0;
}

int grade_seal(const GradeSealArgs& a, Streams io) {
  auto spec = testkit::load_spec(a.spec);
  auto build = unlock::build_vault(spec);
  write_file_atomic(a.out_spec, testkit::serialize_spec(build.student_spec, testkit::Audience::kStudent));
  build.vault.save(a.out_vault);
  io.out << "sealed " << build.vault.entries.size() << " locked cases\n";
  return 0;
}

// --- backup ------------------------------------------------------------------

int backup_sync(const BackupSyncArgs& a, const Config& config, Streams io) {
  auto files = student_files(state_dir_of(a.state_dir, config, a.workdir));
  std::string endpoint = pick(a.endpoint, config.backup_endpoint, "");
  if (endpoint.empty()) throw user_error("usage", "no backup endpoint (use --endpoint or the config file)");
  if (!is_endpoint(endpoint)) throw user_error("usage", "malformed endpoint '" + endpoint + "'");
  telemetry::Outbox outbox(files.outbox);
  telemetry::HttpBackupTransport transport(endpoint, resolve_token(a.token, config));
  auto receipt = telemetry::sync_outbox(outbox, transport, false);
  io.out << receipt.to_json().dump(2) << "\n";
  return 0;
}

int backup_serve(const BackupServeArgs& a, const Config& config, Streams io) {
  telemetry::BackupStore store(a.store);
  telemetry::BackupServer server(store, resolve_token(a.token, config));
  block_stop_signals();
  int port = server.start(a.net.host, a.net.port);
  io.out << "backup server listening on http://" << a.net.host << ":" << port << std::endl;
  wait_for_stop_signal();
  server.stop();
  return 0;
}

// --- server simulate -----------------------------------------------------------

int server_simulate(const SimulateArgs& a, Streams io) {
  if (a.trace.empty() == a.gen.empty()) throw user_error("usage", "give exactly one of --trace or --gen");
  capsim::ArrivalTrace trace = a.trace.empty() ? capsim::gen_trace(parse_gen(a.gen))
                                               : capsim::parse_trace_csv(read_file(a.trace));
  if (!a.emit_trace.empty()) write_file_atomic(a.emit_trace, capsim::trace_to_csv(trace));
  std::vector<capsim::Policy> policies;
  for (const auto& p : a.policies) policies.push_back(capsim::parse_policy(p));
  auto rows = capsim::compare_policies(trace, policies);
  io.out << (a.csv ? capsim::report_csv(rows) : capsim::report_table(rows));
  return 0;
}

// --- queue ---------------------------------------------------------------------

int queue_serve(const QueueServeArgs& a, Streams io) {
  ohq::QueueService service(a.log);
  ohq::QueueHttpServer server(service, {a.student_token, a.ta_token, a.admin_token}, a.ui);
  block_stop_signals();
  int port = server.start(a.net.host, a.net.port);
  io.out << "queue server listening on http://" << a.net.host << ":" << port << std::endl;
  wait_for_stop_signal();
  service.shutdown();
  server.stop();
  return 0;
}

int queue_stats(const QueueStatsArgs& a, Streams io) {
  auto events = ohq::events_from_jsonl(read_file(a.log));
  if (a.roster_size && *a.roster_size < 1) throw user_error("usage", "--roster-size must be >= 1");
  if (a.bucket_width < 1) throw user_error("usage", "--bucket-width must be >= 1");
  auto conc = ohq::concentration(events, a.roster_size);
  auto waits = ohq::wait_stats(events, {a.bucket_width, !a.no_wrap});
  io.out << json{{"concentration", conc.to_json()}, {"waits", ohq::to_json(waits)}}.dump(2) << "\n";
  return 0;
}

// --- seat ------------------------------------------------------------------------

int seat_assign(const SeatAssignArgs& a, const Config& config, Streams io) {
  auto rooms = seating::load_rooms(a.rooms);
  auto roster = seating::load_roster(a.prefs);
  auto pattern = seating::UsabilityPattern::parse(pick(a.pattern, config.default_pattern, "all"));
  auto plan = seating::assign(roster.students, rooms, pattern, a.seed);
  write_output(a.out, plan.serialize(), io.out);
  if (!a.out.empty() && a.out != "-") {
    io.out << "assigned " << plan.assignments.size() << " students, soft score " << plan.total_soft_score << "\n";
  }
  return 0;
}

int seat_audit(const SeatAuditArgs& a, Streams io) {
  auto plan = seating::load_plan(a.plan);
  auto rooms = seating::load_rooms(a.rooms);
  auto roster = seating::load_roster(a.prefs);
  auto pattern = seating::UsabilityPattern::parse(a.pattern.empty() ? plan.pattern : a.pattern);
  auto report = seating::audit(plan, rooms, pattern, roster.students);
  write_output(a.out, report.to_json().dump(2) + "\n", io.out);
  if (!report.ok()) {
    io.err << "error: audit: " << report.violations.size() << " violation(s)\n";
    return 1;
  }
  return 0;
}

int seat_emails(const SeatEmailsArgs& a, Streams io) {
  auto plan = seating::load_plan(a.plan);
  auto roster = seating::load_roster(a.prefs);
  auto batch = seating::render_emails(plan, roster, read_file(a.templ), a.exam);
  write_output(a.out, seating::to_jsonl(batch), io.out);
  return 0;
}

int seat_adjacent(const SeatAdjacentArgs& a, Streams io) {
  auto plan = seating::load_plan(a.plan);
  auto rooms = seating::load_rooms(a.rooms);
  auto it = std::find_if(rooms.begin(), rooms.end(), [&](const seating::Room& r) { return r.room_id == a.room; });
  if (it == rooms.end()) throw user_error("seat", "unknown room '" + a.room + "'");
  auto [row, col] = parse_seat_label(a.seat);
  json out = json::array();
  for (const auto& n : seating::adjacent(*it, row, col, plan)) {
    out.push_back({{"row", n.row}, {"col", n.col}, {"seat", seating::seat_label(n.row, n.col)},
                   {"occupant", n.occupant ? json(*n.occupant) : json(nullptr)}});
  }
  io.out << out.dump(2) << "\n";
  return 0;
}

// --- roster ------------------------------------------------------------------------

int roster_import(const RosterImportArgs& a, Streams io) {
  auto roster = seating::load_roster(a.csv);
  write_output(a.out, seating::serialize_roster(roster), io.out);
  if (!a.out.empty() && a.out != "-") io.out << "imported " << roster.size() << " students\n";
  return 0;
}

}  // namespace courseforge::cli
