#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "courseforge/common/error.hpp"

namespace courseforge::ohq {

enum class TicketStatus { kPending, kAssigned, kResolved, kCanceled };

std::string_view to_string(TicketStatus status);

struct Ticket {
  std::string ticket_id;
  std::int64_t seq = 0;  // creation order; never changes, defines queue position
  std::string student_id;
  std::string assignment;
  std::string question;
  std::string location;
  std::string description;
  TicketStatus status = TicketStatus::kPending;
  std::string ta_id;  // Assigned/Resolved
  std::int64_t created_at = 0;
  std::optional<std::int64_t> assigned_at;  // most recent assignment
  std::optional<std::int64_t> resolved_at;
  std::optional<std::string> session_id;  // while part of an open group session

  bool live() const { return status == TicketStatus::kPending || status == TicketStatus::kAssigned; }
  nlohmann::json to_json() const;
};

struct GroupSession {
  std::string session_id;
  std::string ta_id;
  std::string assignment;
  std::string question;
  std::vector<std::string> member_ticket_ids;  // current members, seq order
  bool open = true;

  nlohmann::json to_json() const;
};

enum class EventKind {
  kTicketCreated,
  kTicketAssigned,
  kTicketResolved,
  kTicketRequeued,
  kTicketCanceled,
  kGroupOpened,
  kNotificationSent,
};

std::string_view to_string(EventKind kind);

// Carries everything needed to replay the transition. Fields that do not
// apply to `kind` stay empty and are omitted from the JSON form.
struct QueueEvent {
  std::int64_t index = 0;  // 1-based commit order
  EventKind kind = EventKind::kTicketCreated;
  std::int64_t timestamp = 0;
  std::string ticket_id;
  std::string session_id;
  std::string ta_id;
  // kTicketCreated
  std::int64_t seq = 0;
  std::string student_id;  // also kNotificationSent
  std::string assignment;  // also kGroupOpened
  std::string question;    // also kGroupOpened
  std::string location;
  std::string description;
  // kGroupOpened
  std::vector<std::string> members;

  nlohmann::json to_json() const;
  static QueueEvent from_json(const nlohmann::json& j);

  friend bool operator==(const QueueEvent&, const QueueEvent&) = default;
};

class QueueError : public Error {
 public:
  // code: duplicate-live-ticket, no-pending-tickets, illegal-transition,
  // not-found, forbidden, not-head, no-matching-tickets, invalid-argument
  QueueError(std::string code, const std::string& message)
      : Error(code == "invalid-argument" ? ErrorCategory::kUser : ErrorCategory::kDomain, code, message) {}
};

// Pure fold over queue events. Holds no behaviour beyond applying events
// that were already validated by OfficeHoursQueue.
class QueueState {
 public:
  void apply(const QueueEvent& event);

  const Ticket* find(std::string_view ticket_id) const;
  const Ticket* by_seq(std::int64_t seq) const;
  const Ticket* live_ticket_of(std::string_view student_id) const;
  const GroupSession* session(std::string_view session_id) const;

  // Pending tickets in seq order.
  std::vector<const Ticket*> pending() const;
  std::vector<const Ticket*> in_progress() const;
  const Ticket* head() const;

  std::int64_t next_seq() const { return last_seq_ + 1; }
  std::int64_t next_session() const { return last_session_ + 1; }
  std::int64_t last_index() const { return last_index_; }

  const std::map<std::int64_t, Ticket>& tickets() const { return tickets_; }
  const std::map<std::string, GroupSession>& sessions() const { return sessions_; }

  nlohmann::json to_json() const;
  std::string serialize() const { return to_json().dump(); }

 private:
  Ticket& mutable_ticket(const std::string& ticket_id);
  void leave_session(Ticket& t);

  std::map<std::int64_t, Ticket> tickets_;           // by seq
  std::map<std::string, std::int64_t> id_to_seq_;
  std::map<std::string, std::int64_t> live_by_student_;
  std::set<std::int64_t> pending_;
  std::map<std::string, GroupSession> sessions_;
  std::int64_t last_seq_ = 0;
  std::int64_t last_session_ = 0;
  std::int64_t last_index_ = 0;
};

// The office-hours queue: validates each operation, turns it into events,
// and applies them. State is always the fold of events().
class OfficeHoursQueue {
 public:
  using EventSink = std::function<void(const QueueEvent&)>;

  OfficeHoursQueue() = default;
  // Replays a persisted log. Throws on a log that does not fold cleanly.
  static OfficeHoursQueue rebuild(const std::vector<QueueEvent>& events);

  void set_sink(EventSink sink) { sink_ = std::move(sink); }

  Ticket create_ticket(const std::string& student_id, const std::string& assignment,
                       const std::string& question, const std::string& location,
                       const std::string& description, std::int64_t now);
  // Assigns the pending ticket with the smallest seq.
  Ticket take_next(const std::string& ta_id, std::int64_t now);
  // Takes a specific ticket; only legal when it is the head of the queue.
  Ticket take(const std::string& ticket_id, const std::string& ta_id, std::int64_t now);
  // Back to Pending with the original seq.
  Ticket requeue(const std::string& ticket_id, std::int64_t now);
  // Only the assigned TA may resolve unless admin_override is set.
  Ticket resolve(const std::string& ticket_id, const std::string& ta_id, std::int64_t now,
                 bool admin_override = false);
  Ticket cancel(const std::string& ticket_id, std::int64_t now);
  GroupSession open_group(const std::string& ta_id, const std::string& assignment,
                          const std::string& question, std::int64_t now);
  std::vector<Ticket> resolve_group(const std::string& session_id, const std::string& ta_id,
                                    std::int64_t now, bool admin_override = false);

  const QueueState& state() const { return state_; }
  const std::vector<QueueEvent>& events() const { return events_; }

 private:
  void commit(QueueEvent event);
  const Ticket& require(const std::string& ticket_id) const;
  Ticket assign(const Ticket& t, const std::string& ta_id, std::int64_t now);

  QueueState state_;
  std::vector<QueueEvent> events_;
  EventSink sink_;
};

std::string events_to_jsonl(const std::vector<QueueEvent>& events);
std::vector<QueueEvent> events_from_jsonl(std::string_view text);

}  // namespace courseforge::ohq
