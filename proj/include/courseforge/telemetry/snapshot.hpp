#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"

#include "courseforge/telemetry/log.hpp"

namespace courseforge::telemetry {

struct SnapshotAnalytics {
  std::string current_question;
  std::int64_t run_count_so_far = 0;
  std::optional<bool> last_result_passed;

  friend bool operator==(const SnapshotAnalytics&, const SnapshotAnalytics&) = default;
};

using FileSet = std::map<std::string, std::string>;  // relative '/'-path -> bytes

struct Snapshot {
  std::string snapshot_hash;  // hex SHA-256 over the canonical file set
  std::string student_id;
  std::string assignment_id;
  std::int64_t created_at = 0;
  FileSet files;
  SnapshotAnalytics analytics;

  nlohmann::json to_json() const;
  // Rejects documents whose hash does not match their files.
  static Snapshot from_json(const nlohmann::json& j);

  friend bool operator==(const Snapshot&, const Snapshot&) = default;
};

// SHA-256 over (len(path) path len(bytes) bytes) for each file in path order,
// lengths as 64-bit big-endian. The empty set hashes to SHA-256("").
std::string hash_files(const FileSet& files);

struct SnapshotOptions {
  std::string student_id;
  std::string assignment_id;
  std::int64_t created_at = 0;
  // Directory names skipped at any depth.
  std::set<std::string> excluded_dirs = {".courseforge", ".git"};
};

// Reads every regular file under `workdir`. An unreadable file raises an
// error naming its path.
FileSet read_tree(const std::filesystem::path& workdir, const std::set<std::string>& excluded_dirs);

Snapshot snapshot(const std::filesystem::path& workdir, const SnapshotOptions& options,
                  SnapshotAnalytics analytics);

// Progress metadata for one student/assignment, from RunAttempt events.
SnapshotAnalytics analytics_from_log(const AttemptLog& log, std::string_view student_id,
                                     std::string_view assignment_id);

}  // namespace courseforge::telemetry
