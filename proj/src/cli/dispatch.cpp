#include <algorithm>
#include <iostream>

#include "CLI11.hpp"
#include "commands.hpp"
#include "courseforge/common/error.hpp"

namespace courseforge::cli {

namespace {

void add_serve_options(CLI::App* cmd, ServeArgs& net) {
  cmd->add_option("--host", net.host, "Address to bind")->capture_default_str();
  cmd->add_option("--port", net.port, "Port to bind (0 picks a free one)")->capture_default_str()->check(CLI::Range(0, 65535));
}

int exit_status(const Error& e) { return e.category() == ErrorCategory::kUser ? 2 : 1; }

std::string one_line(std::string text) {
  std::replace(text.begin(), text.end(), '\n', ' ');
  return text;
}

}  // namespace

int dispatch(const std::vector<std::string>& args, Streams io) {
  CLI::App app{"courseforge: course operations toolkit", "courseforge"};
  app.require_subcommand(1);
  std::string config_path;
  app.add_option("--config", config_path, "JSON config file");

  auto* grade = app.add_subcommand("grade", "Run tests, unlock locked cases, seal specs")->require_subcommand(1);
  GradeRunArgs run;
  auto* grade_run_cmd = grade->add_subcommand("run", "Run test cases against a program");
  grade_run_cmd->add_option("--spec", run.spec, "Test spec (JSON)")->required();
  grade_run_cmd->add_option("--subject", run.subject, "Command line of the program under test")->required();
  grade_run_cmd->add_option("--question", run.questions, "Question id to run (repeatable; default all)");
  grade_run_cmd->add_flag("--no-backup", run.no_backup, "Do not snapshot or upload the work directory");
  grade_run_cmd->add_option("--student", run.student, "Student id");
  grade_run_cmd->add_option("--workdir", run.workdir, "Student work directory")->capture_default_str();
  grade_run_cmd->add_option("--state-dir", run.state_dir, "Local state directory (default <workdir>/.courseforge)");
  grade_run_cmd->add_option("--endpoint", run.endpoint, "Backup server URL");
  grade_run_cmd->add_option("--token", run.token, "Backup auth token");
  grade_run_cmd->add_flag("--partial-credit", run.partial_credit, "Scale points by passed cases");
  grade_run_cmd->add_flag("--json", run.json, "Print results as JSON");

  GradeUnlockArgs unl;
  auto* grade_unlock_cmd = grade->add_subcommand("unlock", "Answer locked test cases to unlock them");
  grade_unlock_cmd->add_option("--spec", unl.spec, "Student test spec (JSON)")->required();
  grade_unlock_cmd->add_option("--vault", unl.vault, "Unlock vault (JSON)")->required();
  grade_unlock_cmd->add_option("--student", unl.student, "Student id");
  grade_unlock_cmd->add_option("--workdir", unl.workdir, "Student work directory")->capture_default_str();
  grade_unlock_cmd->add_option("--state-dir", unl.state_dir, "Local state directory");

  GradeSealArgs seal;
  auto* grade_seal_cmd = grade->add_subcommand("seal", "Split an instructor spec into a student spec and a vault");
  grade_seal_cmd->add_option("--spec", seal.spec, "Instructor test spec (JSON)")->required();
  grade_seal_cmd->add_option("--out-spec", seal.out_spec, "Student spec to write")->required();
  grade_seal_cmd->add_option("--out-vault", seal.out_vault, "Vault to write")->required();

  auto* backup = app.add_subcommand("backup", "Snapshot upload and backup server")->require_subcommand(1);
  BackupSyncArgs bsync;
  auto* backup_sync_cmd = backup->add_subcommand("sync", "Upload queued snapshots");
  backup_sync_cmd->add_option("--workdir", bsync.workdir, "Student work directory")->capture_default_str();
  backup_sync_cmd->add_option("--state-dir", bsync.state_dir, "Local state directory");
  backup_sync_cmd->add_option("--endpoint", bsync.endpoint, "Backup server URL");
  backup_sync_cmd->add_option("--token", bsync.token, "Auth token");

  BackupServeArgs bserve;
  auto* backup_serve_cmd = backup->add_subcommand("serve", "Run the backup server");
  backup_serve_cmd->add_option("--store", bserve.store, "Store directory")->required();
  backup_serve_cmd->add_option("--token", bserve.token, "Required bearer token");
  add_serve_options(backup_serve_cmd, bserve.net);

  auto* server = app.add_subcommand("server", "Grading backend capacity tools")->require_subcommand(1);
  SimulateArgs sim;
  auto* simulate_cmd = server->add_subcommand("simulate", "Compare provisioning policies on an arrival trace");
  simulate_cmd->add_option("--trace", sim.trace, "Trace CSV (job_id,arrival_time,service_time)");
  simulate_cmd->add_option("--gen", sim.gen, "Synthetic trace: n=..,deadline=..,sharpness=..,service=..,ramp=..,seed=..");
  simulate_cmd->add_option("--policy", sim.policies, "fixed:<k> | elastic:<latency_s>[:<max>|:unbounded] (repeatable)")->required();
  simulate_cmd->add_flag("--csv", sim.csv, "CSV output");
  simulate_cmd->add_option("--emit-trace", sim.emit_trace, "Also write the trace used as CSV");

  auto* queue = app.add_subcommand("queue", "Office hours queue")->require_subcommand(1);
  QueueServeArgs qserve;
  auto* queue_serve_cmd = queue->add_subcommand("serve", "Run the queue service");
  queue_serve_cmd->add_option("--log", qserve.log, "Event log (JSON lines)")->required();
  queue_serve_cmd->add_option("--student-token", qserve.student_token, "Bearer token for students")->required();
  queue_serve_cmd->add_option("--ta-token", qserve.ta_token, "Bearer token for TAs")->required();
  queue_serve_cmd->add_option("--admin-token", qserve.admin_token, "Bearer token for admins")->required();
  queue_serve_cmd->add_option("--ui", qserve.ui, "Directory of static UI files");
  add_serve_options(queue_serve_cmd, qserve.net);

  QueueStatsArgs qstats;
  auto* queue_stats_cmd = queue->add_subcommand("stats", "Concentration and wait statistics from an event log");
  queue_stats_cmd->add_option("--log", qstats.log, "Event log (JSON lines)")->required();
  queue_stats_cmd->add_option("--roster-size", qstats.roster_size, "Class size");
  queue_stats_cmd->add_option("--bucket-width", qstats.bucket_width, "Histogram bucket width in seconds")->capture_default_str();
  queue_stats_cmd->add_flag("--no-wrap", qstats.no_wrap, "Do not fold the histogram onto one day");

  auto* seat = app.add_subcommand("seat", "Exam seating")->require_subcommand(1);
  SeatAssignArgs sassign;
  auto* seat_assign_cmd = seat->add_subcommand("assign", "Assign students to seats");
  seat_assign_cmd->add_option("--rooms", sassign.rooms, "Directory of room JSON files")->required();
  seat_assign_cmd->add_option("--prefs", sassign.prefs, "Roster CSV with seat preferences")->required();
  seat_assign_cmd->add_option("--pattern", sassign.pattern, "all | every-other:<0|1> | checkerboard:<0|1> | skip-rows:<k>");
  seat_assign_cmd->add_option("--seed", sassign.seed, "Randomization seed")->capture_default_str();
  seat_assign_cmd->add_option("--out", sassign.out, "Plan file to write (default stdout)");

  SeatAuditArgs saudit;
  auto* seat_audit_cmd = seat->add_subcommand("audit", "Re-check a seating plan");
  seat_audit_cmd->add_option("--plan", saudit.plan, "Plan JSON")->required();
  seat_audit_cmd->add_option("--rooms", saudit.rooms, "Directory of room JSON files")->required();
  seat_audit_cmd->add_option("--prefs", saudit.prefs, "Roster CSV")->required();
  seat_audit_cmd->add_option("--pattern", saudit.pattern, "Pattern to audit against (default: the plan's)");
  seat_audit_cmd->add_option("--out", saudit.out, "Report file to write (default stdout)");

  SeatEmailsArgs semails;
  auto* seat_emails_cmd = seat->add_subcommand("emails", "Render per-student seat emails");
  seat_emails_cmd->add_option("--plan", semails.plan, "Plan JSON")->required();
  seat_emails_cmd->add_option("--prefs", semails.prefs, "Roster CSV")->required();
  seat_emails_cmd->add_option("--template", semails.templ, "Template file")->required();
  seat_emails_cmd->add_option("--exam", semails.exam, "Exam name for {{exam}}");
  seat_emails_cmd->add_option("--out", semails.out, "JSON-lines file to write (default stdout)");

  SeatAdjacentArgs sadj;
  auto* seat_adjacent_cmd = seat->add_subcommand("adjacent", "List the seats around one seat and who sits there");
  seat_adjacent_cmd->add_option("--plan", sadj.plan, "Plan JSON")->required();
  seat_adjacent_cmd->add_option("--rooms", sadj.rooms, "Directory of room JSON files")->required();
  seat_adjacent_cmd->add_option("--room", sadj.room, "Room id")->required();
  seat_adjacent_cmd->add_option("--seat", sadj.seat, "Seat label, e.g. B7")->required();

  auto* roster = app.add_subcommand("roster", "Roster management")->require_subcommand(1);
  RosterImportArgs rimport;
  auto* roster_import_cmd = roster->add_subcommand("import", "Validate a roster CSV and store it in canonical form");
  roster_import_cmd->add_option("--csv", rimport.csv, "Roster CSV")->required();
  roster_import_cmd->add_option("--out", rimport.out, "Where to store the roster (default stdout)");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    io.out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp& e) {
    io.out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    io.err << "error: usage: " << one_line(e.what()) << "\n";
    const CLI::App* deepest = &app;
    for (auto subs = deepest->get_subcommands(); !subs.empty(); subs = deepest->get_subcommands()) deepest = subs.front();
    io.err << deepest->help();
    return 2;
  }

  try {
    Config config = config_path.empty() ? Config{} : load_config(config_path);
    if (grade_run_cmd->parsed()) return grade_run(run, config, io);
    if (grade_unlock_cmd->parsed()) return grade_unlock(unl, config, io);
    if (grade_seal_cmd->parsed()) return grade_seal(seal, io);
    if (backup_sync_cmd->parsed()) return backup_sync(bsync, config, io);
    if (backup_serve_cmd->parsed()) return backup_serve(bserve, config, io);
    if (simulate_cmd->parsed()) return server_simulate(sim, io);
    if (queue_serve_cmd->parsed()) return queue_serve(qserve, io);
    if (queue_stats_cmd->parsed()) return queue_stats(qstats, io);
    if (seat_assign_cmd->parsed()) return seat_assign(sassign, config, io);
    if (seat_audit_cmd->parsed()) return seat_audit(saudit, io);
    if (seat_emails_cmd->parsed()) return seat_emails(semails, io);
    if (seat_adjacent_cmd->parsed()) return seat_adjacent(sadj, io);
    if (roster_import_cmd->parsed()) return roster_import(rimport, io);
  } catch (const Error& e) {
    io.err << "error: " << e.code() << ": " << one_line(e.what()) << "\n";
    return exit_status(e);
  } catch (const std::exception& e) {
    io.err << "error: internal: " << one_line(e.what()) << "\n";
    return 1;
  }
  io.err << "error: usage: no command\n" << app.help();
  return 2;
}

}  // namespace courseforge::cli
