#include "courseforge/telemetry/log.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <fstream>
#include <sstream>

#include "courseforge/common/error.hpp"

namespace courseforge::telemetry {

using nlohmann::json;

std::string_view to_string(EventKind kind) {
  switch (kind) {
    case EventKind::kRunAttempt: return "RunAttempt";
    case EventKind::kUnlockAttempt: return "UnlockAttempt";
    case EventKind::kBackupPushed: return "BackupPushed";
    case EventKind::kVelocityDenied: return "VelocityDenied";
  }
  return "?";
}

json to_json(const AttemptEvent& e) {
  json payload = std::visit(
      [](const auto& p) -> json {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, RunPayload>) {
          return {{"passed", p.passed}};
        } else if constexpr (std::is_same_v<T, UnlockPayload>) {
          return {{"attempt_no", p.attempt_no}, {"case_id", p.case_id}, {"correct", p.correct}};
        } else if constexpr (std::is_same_v<T, BackupPayload>) {
          return {{"snapshot_hash", p.snapshot_hash}};
        } else {
          return {{"retry_after", p.retry_after}};
        }
      },
      e.payload);
  return {{"kind", to_string(e.kind())},
          {"student_id", e.student_id},
          {"assignment_id", e.assignment_id},
          {"question_id", e.question_id},
          {"timestamp", e.timestamp},
          {"payload", std::move(payload)}};
}

AttemptEvent event_from_json(const json& j) {
  try {
    AttemptEvent e;
    e.student_id = j.at("student_id").get<std::string>();
    e.assignment_id = j.at("assignment_id").get<std::string>();
    e.question_id = j.at("question_id").get<std::string>();
    e.timestamp = j.at("timestamp").get<std::int64_t>();
    const auto kind = j.at("kind").get<std::string>();
    const json& p = j.at("payload");
    if (kind == "RunAttempt") {
      e.payload = RunPayload{p.at("passed").get<bool>()};
    } else if (kind == "UnlockAttempt") {
      e.payload = UnlockPayload{p.at("attempt_no").get<std::int64_t>(),
                                p.at("case_id").get<std::string>(), p.at("correct").get<bool>()};
    } else if (kind == "BackupPushed") {
      e.payload = BackupPayload{p.at("snapshot_hash").get<std::string>()};
    } else if (kind == "VelocityDenied") {
      e.payload = DeniedPayload{p.at("retry_after").get<std::int64_t>()};
    } else {
      throw user_error("log", "unknown event kind '" + kind + "'");
    }
    return e;
  } catch (const json::exception& ex) {
    throw user_error("log", std::string("malformed event: ") + ex.what());
  }
}

void AttemptLog::append(AttemptEvent event) {
  if (!events_.empty() && event.timestamp < events_.back().timestamp) {
    throw domain_error("timestamp-regression",
                       "event timestamp " + std::to_string(event.timestamp) +
                           " precedes last logged timestamp " + std::to_string(events_.back().timestamp));
  }
  events_.push_back(std::move(event));
}

std::string AttemptLog::to_jsonl() const {
  std::string out;
  for (const auto& e : events_) {
    out += to_json(e).dump();
    out.push_back('\n');
  }
  return out;
}

AttemptLog AttemptLog::from_jsonl(std::string_view text) {
  AttemptLog log;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    auto line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error&) {
      throw user_error("log", "line " + std::to_string(line_no) + ": malformed JSON");
    }
    log.append(event_from_json(j));
  }
  return log;
}

AttemptLog AttemptLog::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return {};
  std::ostringstream buf;
  buf << in.rdbuf();
  return from_jsonl(buf.str());
}

AttemptLog record_attempt(AttemptLog log, AttemptEvent event) {
  log.append(std::move(event));
  return log;
}

void append_to_file(const std::string& path, const AttemptEvent& event) {
  std::string line = to_json(event).dump() + "\n";
  int fd = ::open(path.c_str(), O_WRONLY | O_CREAT | O_APPEND | O_CLOEXEC, 0644);
  if (fd < 0) throw user_error("io", "cannot open log '" + path + "': " + std::strerror(errno));
  ssize_t n = ::write(fd, line.data(), line.size());
  ::close(fd);
  if (n != static_cast<ssize_t>(line.size())) throw user_error("io", "short write to log '" + path + "'");
}

}  // namespace courseforge::telemetry
