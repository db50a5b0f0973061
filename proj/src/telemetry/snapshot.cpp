#include "courseforge/telemetry/snapshot.hpp"

#include <fstream>
#include <sstream>

#include "courseforge/common/digest.hpp"
#include "courseforge/common/error.hpp"

namespace courseforge::telemetry {

namespace fs = std::filesystem;
using nlohmann::json;

std::string hash_files(const FileSet& files) {
  Sha256 h;
  for (const auto& [path, bytes] : files) {
    h.update_length(path.size()).update(path);
    h.update_length(bytes.size()).update(bytes);
  }
  return to_hex(h.finish());
}

json Snapshot::to_json() const {
  json jfiles = json::object();
  for (const auto& [path, bytes] : files) jfiles[path] = base64_encode(bytes);
  json ja = {{"current_question", analytics.current_question},
             {"run_count_so_far", analytics.run_count_so_far},
             {"last_result_passed", analytics.last_result_passed ? json(*analytics.last_result_passed) : json(nullptr)}};
  return {{"snapshot_hash", snapshot_hash}, {"student_id", student_id},
          {"assignment_id", assignment_id}, {"created_at", created_at},
          {"files", std::move(jfiles)},     {"analytics", std::move(ja)}};
}

Snapshot Snapshot::from_json(const json& j) {
  Snapshot s;
  try {
    s.snapshot_hash = j.at("snapshot_hash").get<std::string>();
    s.student_id = j.at("student_id").get<std::string>();
    s.assignment_id = j.at("assignment_id").get<std::string>();
    s.created_at = j.at("created_at").get<std::int64_t>();
    for (const auto& [path, b64] : j.at("files").items()) s.files[path] = base64_decode(b64.get<std::string>());
    const json& ja = j.at("analytics");
    s.analytics.current_question = ja.at("current_question").get<std::string>();
    s.analytics.run_count_so_far = ja.at("run_count_so_far").get<std::int64_t>();
    if (!ja.at("last_result_passed").is_null()) s.analytics.last_result_passed = ja.at("last_result_passed").get<bool>();
  } catch (const json::exception& e) {
    throw user_error("snapshot", std::string("malformed snapshot: ") + e.what());
  }
  if (hash_files(s.files) != s.snapshot_hash) {
    throw user_error("snapshot", "snapshot_hash does not match file contents");
  }
  return s;
}

FileSet read_tree(const fs::path& workdir, const std::set<std::string>& excluded_dirs) {
  FileSet files;
  std::error_code ec;
  if (!fs::is_directory(workdir, ec)) {
    throw user_error("io", "workdir '" + workdir.string() + "' is not a readable directory");
  }
  fs::recursive_directory_iterator it(workdir, ec), end;
  if (ec) throw user_error("io", "cannot read '" + workdir.string() + "': " + ec.message());
  for (; it != end; it.increment(ec)) {
    if (ec) throw user_error("io", "cannot read under '" + workdir.string() + "': " + ec.message());
    const fs::path& p = it->path();
    if (it->is_directory() && excluded_dirs.count(p.filename().string())) {
      it.disable_recursion_pending();
      continue;
    }
    if (!it->is_regular_file()) continue;
    std::ifstream in(p, std::ios::binary);
    std::ostringstream buf;
    if (!in || !(buf << in.rdbuf())) {
      // An empty file makes operator<< set failbit without an actual error.
      if (!in.is_open() || fs::file_size(p, ec) != 0) {
        throw user_error("io", "unreadable file '" + p.string() + "'");
      }
    }
    files[fs::relative(p, workdir).generic_string()] = buf.str();
  }
  return files;
}

Snapshot snapshot(const fs::path& workdir, const SnapshotOptions& options, SnapshotAnalytics analytics) {
  Snapshot s;
  s.files = read_tree(workdir, options.excluded_dirs);
  s.snapshot_hash = hash_files(s.files);
  s.student_id = options.student_id;
  s.assignment_id = options.assignment_id;
  s.created_at = options.created_at;
  s.analytics = std::move(analytics);
  return s;
}

SnapshotAnalytics analytics_from_log(const AttemptLog& log, std::string_view student_id,
                                     std::string_view assignment_id) {
  SnapshotAnalytics a;
  for (const auto& e : log.events()) {
    if (e.student_id != student_id || e.assignment_id != assignment_id) continue;
    if (const auto* run = std::get_if<RunPayload>(&e.payload)) {
      ++a.run_count_so_far;
      a.current_question = e.question_id;
      a.last_result_passed = run->passed;
    }
  }
  return a;
}

}  // namespace courseforge::telemetry
