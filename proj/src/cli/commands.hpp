#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "courseforge/cli/cli.hpp"

namespace courseforge::cli {

struct GradeRunArgs {
  std::string spec;
  std::string subject;
  std::vector<std::string> questions;
  bool no_backup = false;
  std::string student;
  std::string workdir = ".";
  std::string state_dir;
  std::string endpoint;
  std::string token;
  bool partial_credit = false;
  bool json = false;
};

struct GradeUnlockArgs {
  std::string spec;
  std::string vault;
  std::string student;
  std::string workdir = ".";
  std::string state_dir;
};

struct GradeSealArgs {
  std::string spec;
  std::string out_spec;
  std::string out_vault;
};

struct BackupSyncArgs {
  std::string workdir = ".";
  std::string state_dir;
  std::string endpoint;
  std::string token;
};

struct ServeArgs {
  std::string host = "127.0.0.1";
  int port = 8080;
};

struct BackupServeArgs {
  std::string store;
  std::string token;
  ServeArgs net;
};

struct SimulateArgs {
  std::string trace;
  std::string gen;
  std::vector<std::string> policies;
  bool csv = false;
  std::string emit_trace;
};

struct QueueServeArgs {
  std::string log;
  std::string student_token;
  std::string ta_token;
  std::string admin_token;
  std::string ui;
  ServeArgs net;
};

struct QueueStatsArgs {
  std::string log;
  std::optional<std::int64_t> roster_size;
  std::int64_t bucket_width = 3600;
  bool no_wrap = false;
};

struct SeatAssignArgs {
  std::string rooms;
  std::string prefs;
  std::string pattern;
  std::uint64_t seed = 0;
  std::string out;
};

struct SeatAuditArgs {
  std::string plan;
  std::string rooms;
  std::string prefs;
  std::string pattern;
  std::string out;
};

struct SeatEmailsArgs {
  std::string plan;
  std::string prefs;
  std::string templ;
  std::string exam;
  std::string out;
};

struct SeatAdjacentArgs {
  std::string plan;
  std::string rooms;
  std::string room;
  std::string seat;
};

struct RosterImportArgs {
  std::string csv;
  std::string out;
};

int grade_run(const GradeRunArgs& a, const Config& config, Streams io);
int grade_unlock(const GradeUnlockArgs& a, const Config& config, Streams io);
int grade_seal(const GradeSealArgs& a, Streams io);
int backup_sync(const BackupSyncArgs& a, const Config& config, Streams io);
int backup_serve(const BackupServeArgs& a, const Config& config, Streams io);
int server_simulate(const SimulateArgs& a, Streams io);
int queue_serve(const QueueServeArgs& a, Streams io);
int queue_stats(const QueueStatsArgs& a, Streams io);
int seat_assign(const SeatAssignArgs& a, const Config& config, Streams io);
int seat_audit(const SeatAuditArgs& a, Streams io);
int seat_emails(const SeatEmailsArgs& a, Streams io);
int seat_adjacent(const SeatAdjacentArgs& a, Streams io);
int roster_import(const RosterImportArgs& a, Streams io);

}  // namespace courseforge::cli
