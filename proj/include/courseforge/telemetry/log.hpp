#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "json.hpp"

namespace courseforge::telemetry {

enum class EventKind { kRunAttempt, kUnlockAttempt, kBackupPushed, kVelocityDenied };

std::string_view to_string(EventKind kind);

struct RunPayload {
  bool passed = false;
  friend bool operator==(const RunPayload&, const RunPayload&) = default;
};
struct UnlockPayload {
  std::int64_t attempt_no = 0;
  std::string case_id;
  bool correct = false;
  friend bool operator==(const UnlockPayload&, const UnlockPayload&) = default;
};
struct BackupPayload {
  std::string snapshot_hash;
  friend bool operator==(const BackupPayload&, const BackupPayload&) = default;
};
struct DeniedPayload {
  std::int64_t retry_after = 0;
  friend bool operator==(const DeniedPayload&, const DeniedPayload&) = default;
};

// Alternative order matches EventKind.
using Payload = std::variant<RunPayload, UnlockPayload, BackupPayload, DeniedPayload>;

struct AttemptEvent {
  std::string student_id;
  std::string assignment_id;
  std::string question_id;
  std::int64_t timestamp = 0;  // seconds
  Payload payload;

  EventKind kind() const { return static_cast<EventKind>(payload.index()); }

  friend bool operator==(const AttemptEvent&, const AttemptEvent&) = default;
};

nlohmann::json to_json(const AttemptEvent& event);
AttemptEvent event_from_json(const nlohmann::json& j);

// Append-only, timestamp-monotone event log. Serialized as JSON lines, one
// event per line.
class AttemptLog {
 public:
  AttemptLog() = default;

  // Throws courseforge::Error ("timestamp-regression") when the event is
  // older than the last one.
  void append(AttemptEvent event);

  const std::vector<AttemptEvent>& events() const { return events_; }
  std::size_t size() const { return events_.size(); }
  bool empty() const { return events_.empty(); }
  std::int64_t last_timestamp() const { return events_.empty() ? INT64_MIN : events_.back().timestamp; }

  std::string to_jsonl() const;
  static AttemptLog from_jsonl(std::string_view text);

  // Missing file yields an empty log.
  static AttemptLog load(const std::string& path);

 private:
  std::vector<AttemptEvent> events_;
};

AttemptLog record_attempt(AttemptLog log, AttemptEvent event);

// Appends one serialized line with a single O_APPEND write, so concurrent
// writers never interleave within a line.
void append_to_file(const std::string& path, const AttemptEvent& event);

}  // namespace courseforge::telemetry
