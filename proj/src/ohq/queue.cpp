#include "courseforge/ohq/queue.hpp"

#include <algorithm>

namespace courseforge::ohq {

using nlohmann::json;

namespace {

json opt(const std::optional<std::int64_t>& v) { return v ? json(*v) : json(nullptr); }

constexpr std::pair<EventKind, std::string_view> kEventNames[] = {
    {EventKind::kTicketCreated, "TicketCreated"},   {EventKind::kTicketAssigned, "TicketAssigned"},
    {EventKind::kTicketResolved, "TicketResolved"}, {EventKind::kTicketRequeued, "TicketRequeued"},
    {EventKind::kTicketCanceled, "TicketCanceled"}, {EventKind::kGroupOpened, "GroupOpened"},
    {EventKind::kNotificationSent, "NotificationSent"},
};

[[noreturn]] void illegal(const Ticket& t, std::string_view action) {
  throw QueueError("illegal-transition", "cannot " + std::string(action) + " ticket " + t.ticket_id + " in state " +
                                             std::string(to_string(t.status)));
}

}  // namespace

std::string_view to_string(TicketStatus status) {
  switch (status) {
    case TicketStatus::kPending: return "Pending";
    case TicketStatus::kAssigned: return "Assigned";
    case TicketStatus::kResolved: return "Resolved";
    case TicketStatus::kCanceled: return "Canceled";
  }
  return "?";
}

std::string_view to_string(EventKind kind) {
  for (const auto& [k, name] : kEventNames) {
    if (k == kind) return name;
  }
  return "?";
}

json Ticket::to_json() const {
  return {{"ticket_id", ticket_id},
          {"seq", seq},
          {"student_id", student_id},
          {"assignment", assignment},
          {"question", question},
          {"location", location},
          {"description", description},
          {"status", to_string(status)},
          {"ta_id", ta_id.empty() ? json(nullptr) : json(ta_id)},
          {"created_at", created_at},
          {"assigned_at", opt(assigned_at)},
          {"resolved_at", opt(resolved_at)},
          {"session_id", session_id ? json(*session_id) : json(nullptr)}};
}

json GroupSession::to_json() const {
  return {{"session_id", session_id}, {"ta_id", ta_id},   {"assignment", assignment},
          {"question", question},     {"open", open},     {"member_ticket_ids", member_ticket_ids}};
}

json QueueEvent::to_json() const {
  json j = {{"index", index}, {"kind", to_string(kind)}, {"timestamp", timestamp}};
  if (!ticket_id.empty()) j["ticket_id"] = ticket_id;
  if (!session_id.empty()) j["session_id"] = session_id;
  if (!ta_id.empty()) j["ta_id"] = ta_id;
  if (!student_id.empty()) j["student_id"] = student_id;
  if (kind == EventKind::kTicketCreated) {
    j["seq"] = seq;
    j["location"] = location;
    j["description"] = description;
  }
  if (kind == EventKind::kTicketCreated || kind == EventKind::kGroupOpened) {
    j["assignment"] = assignment;
    j["question"] = question;
  }
  if (kind == EventKind::kGroupOpened) j["members"] = members;
  return j;
}

QueueEvent QueueEvent::from_json(const json& j) {
  try {
    QueueEvent e;
    e.index = j.at("index").get<std::int64_t>();
    auto kind = j.at("kind").get<std::string>();
    auto it = std::find_if(std::begin(kEventNames), std::end(kEventNames),
                           [&](const auto& p) { return p.second == kind; });
    if (it == std::end(kEventNames)) throw QueueError("invalid-argument", "unknown event kind '" + kind + "'");
    e.kind = it->first;
    e.timestamp = j.at("timestamp").get<std::int64_t>();
    e.ticket_id = j.value("ticket_id", "");
    e.session_id = j.value("session_id", "");
    e.ta_id = j.value("ta_id", "");
    e.student_id = j.value("student_id", "");
    e.seq = j.value("seq", std::int64_t{0});
    e.assignment = j.value("assignment", "");
    e.question = j.value("question", "");
    e.location = j.value("location", "");
    e.description = j.value("description", "");
    if (auto m = j.find("members"); m != j.end()) e.members = m->get<std::vector<std::string>>();
    return e;
  } catch (const json::exception& ex) {
    throw QueueError("invalid-argument", std::string("malformed queue event: ") + ex.what());
  }
}

// --- QueueState -------------------------------------------------------------

Ticket& QueueState::mutable_ticket(const std::string& ticket_id) {
  auto it = id_to_seq_.find(ticket_id);
  if (it == id_to_seq_.end()) throw QueueError("not-found", "no ticket '" + ticket_id + "'");
  return tickets_.at(it->second);
}

void QueueState::leave_session(Ticket& t) {
  if (!t.session_id) return;
  auto it = sessions_.find(*t.session_id);
  if (it != sessions_.end()) {
    auto& members = it->second.member_ticket_ids;
    members.erase(std::remove(members.begin(), members.end(), t.ticket_id), members.end());
    if (members.empty()) it->second.open = false;
  }
  t.session_id.reset();
}

void QueueState::apply(const QueueEvent& e) {
  if (e.index != last_index_ + 1) {
    throw QueueError("invalid-argument", "event index " + std::to_string(e.index) + " out of order (expected " +
                                             std::to_string(last_index_ + 1) + ")");
  }
  switch (e.kind) {
    case EventKind::kTicketCreated: {
      if (e.seq <= last_seq_) throw QueueError("invalid-argument", "non-monotone seq in event log");
      if (id_to_seq_.count(e.ticket_id)) throw QueueError("invalid-argument", "duplicate ticket id in event log");
      Ticket t;
      t.ticket_id = e.ticket_id;
      t.seq = e.seq;
      t.student_id = e.student_id;
      t.assignment = e.assignment;
      t.question = e.question;
      t.location = e.location;
      t.description = e.description;
      t.created_at = e.timestamp;
      last_seq_ = e.seq;
      id_to_seq_[t.ticket_id] = t.seq;
      live_by_student_[t.student_id] = t.seq;
      pending_.insert(t.seq);
      tickets_.emplace(t.seq, std::move(t));
      break;
    }
    case EventKind::kTicketAssigned: {
      Ticket& t = mutable_ticket(e.ticket_id);
      if (t.status != TicketStatus::kPending) illegal(t, "assign");
      t.status = TicketStatus::kAssigned;
      t.ta_id = e.ta_id;
      t.assigned_at = e.timestamp;
      if (!e.session_id.empty()) t.session_id = e.session_id;
      pending_.erase(t.seq);
      break;
    }
    case EventKind::kTicketResolved: {
      Ticket& t = mutable_ticket(e.ticket_id);
      if (t.status != TicketStatus::kAssigned) illegal(t, "resolve");
      t.status = TicketStatus::kResolved;
      t.ta_id = e.ta_id;
      t.resolved_at = e.timestamp;
      leave_session(t);
      live_by_student_.erase(t.student_id);
      break;
    }
    case EventKind::kTicketRequeued: {
      Ticket& t = mutable_ticket(e.ticket_id);
      if (t.status != TicketStatus::kAssigned) illegal(t, "requeue");
      t.status = TicketStatus::kPending;
      t.ta_id.clear();
      leave_session(t);
      pending_.insert(t.seq);
      break;
    }
    case EventKind::kTicketCanceled: {
      Ticket& t = mutable_ticket(e.ticket_id);
      if (t.status != TicketStatus::kPending) illegal(t, "cancel");
      t.status = TicketStatus::kCanceled;
      pending_.erase(t.seq);
      live_by_student_.erase(t.student_id);
      break;
    }
    case EventKind::kGroupOpened: {
      GroupSession s{e.session_id, e.ta_id, e.assignment, e.question, e.members, true};
      sessions_[s.session_id] = std::move(s);
      last_session_ += 1;
      break;
    }
    case EventKind::kNotificationSent:
      break;
  }
  last_index_ = e.index;
}

const Ticket* QueueState::find(std::string_view ticket_id) const {
  auto it = id_to_seq_.find(std::string(ticket_id));
  return it == id_to_seq_.end() ? nullptr : &tickets_.at(it->second);
}

const Ticket* QueueState::by_seq(std::int64_t seq) const {
  auto it = tickets_.find(seq);
  return it == tickets_.end() ? nullptr : &it->second;
}

const Ticket* QueueState::live_ticket_of(std::string_view student_id) const {
  auto it = live_by_student_.find(std::string(student_id));
  return it == live_by_student_.end() ? nullptr : &tickets_.at(it->second);
}

const GroupSession* QueueState::session(std::string_view session_id) const {
  auto it = sessions_.find(std::string(session_id));
  return it == sessions_.end() ? nullptr : &it->second;
}

std::vector<const Ticket*> QueueState::pending() const {
  std::vector<const Ticket*> out;
  for (auto seq : pending_) out.push_back(&tickets_.at(seq));
  return out;
}

std::vector<const Ticket*> QueueState::in_progress() const {
  std::vector<const Ticket*> out;
  for (const auto& [seq, t] : tickets_) {
    if (t.status == TicketStatus::kAssigned) out.push_back(&t);
  }
  return out;
}

const Ticket* QueueState::head() const {
  return pending_.empty() ? nullptr : &tickets_.at(*pending_.begin());
}

json QueueState::to_json() const {
  json tickets = json::array();
  for (const auto& [seq, t] : tickets_) tickets.push_back(t.to_json());
  json sessions = json::array();
  for (const auto& [id, s] : sessions_) sessions.push_back(s.to_json());
  return {{"tickets", std::move(tickets)},
          {"sessions", std::move(sessions)},
          {"last_seq", last_seq_},
          {"last_session", last_session_},
          {"last_index", last_index_}};
}

// --- OfficeHoursQueue -------------------------------------------------------

OfficeHoursQueue OfficeHoursQueue::rebuild(const std::vector<QueueEvent>& events) {
  OfficeHoursQueue q;
  for (const auto& e : events) {
    q.state_.apply(e);
    q.events_.push_back(e);
  }
  return q;
}

void OfficeHoursQueue::commit(QueueEvent event) {
  event.index = state_.last_index() + 1;
  // Persisted before it takes effect; operations validate first, so apply()
  // cannot reject a committed event.
  if (sink_) sink_(event);
  state_.apply(event);
  events_.push_back(std::move(event));
}

const Ticket& OfficeHoursQueue::require(const std::string& ticket_id) const {
  const Ticket* t = state_.find(ticket_id);
  if (t == nullptr) throw QueueError("not-found", "no ticket '" + ticket_id + "'");
  return *t;
}

Ticket OfficeHoursQueue::create_ticket(const std::string& student_id, const std::string& assignment,
                                       const std::string& question, const std::string& location,
                                       const std::string& description, std::int64_t now) {
  if (student_id.empty() || assignment.empty() || question.empty()) {
    throw QueueError("invalid-argument", "student_id, assignment and question are required");
  }
  if (const Ticket* live = state_.live_ticket_of(student_id)) {
    throw QueueError("duplicate-live-ticket",
                     "student " + student_id + " already has live ticket " + live->ticket_id);
  }
  QueueEvent e;
  e.kind = EventKind::kTicketCreated;
  e.timestamp = now;
  e.seq = state_.next_seq();
  e.ticket_id = "t" + std::to_string(e.seq);
  e.student_id = student_id;
  e.assignment = assignment;
  e.question = question;
  e.location = location;
  e.description = description;
  std::string id = e.ticket_id;
  commit(std::move(e));
  return require(id);
}

Ticket OfficeHoursQueue::assign(const Ticket& t, const std::string& ta_id, std::int64_t now) {
  std::string id = t.ticket_id;
  std::string student = t.student_id;
  QueueEvent a;
  a.kind = EventKind::kTicketAssigned;
  a.timestamp = now;
  a.ticket_id = id;
  a.ta_id = ta_id;
  commit(std::move(a));
  QueueEvent n;
  n.kind = EventKind::kNotificationSent;
  n.timestamp = now;
  n.ticket_id = id;
  n.student_id = student;
  n.ta_id = ta_id;
  commit(std::move(n));
  return require(id);
}

Ticket OfficeHoursQueue::take_next(const std::string& ta_id, std::int64_t now) {
  if (ta_id.empty()) throw QueueError("invalid-argument", "ta_id is required");
  const Ticket* head = state_.head();
  if (head == nullptr) throw QueueError("no-pending-tickets", "no pending tickets");
  return assign(*head, ta_id, now);
}

Ticket OfficeHoursQueue::take(const std::string& ticket_id, const std::string& ta_id, std::int64_t now) {
  if (ta_id.empty()) throw QueueError("invalid-argument", "ta_id is required");
  const Ticket& t = require(ticket_id);
  if (t.status != TicketStatus::kPending) illegal(t, "take");
  if (state_.head() != &t) {
    throw QueueError("not-head", "ticket " + ticket_id + " is not first in line (next is " +
                                     state_.head()->ticket_id + ")");
  }
  return assign(t, ta_id, now);
}

Ticket OfficeHoursQueue::requeue(const std::string& ticket_id, std::int64_t now) {
  const Ticket& t = require(ticket_id);
  if (t.status != TicketStatus::kAssigned) illegal(t, "requeue");
  QueueEvent e;
  e.kind = EventKind::kTicketRequeued;
  e.timestamp = now;
  e.ticket_id = ticket_id;
  e.session_id = t.session_id.value_or("");
  commit(std::move(e));
  return require(ticket_id);
}

Ticket OfficeHoursQueue::resolve(const std::string& ticket_id, const std::string& ta_id, std::int64_t now,
                                 bool admin_override) {
  const Ticket& t = require(ticket_id);
  if (t.status != TicketStatus::kAssigned) illegal(t, "resolve");
  if (t.ta_id != ta_id && !admin_override) {
    throw QueueError("forbidden", "ticket " + ticket_id + " is assigned to " + t.ta_id + ", not " + ta_id);
  }
  QueueEvent e;
  e.kind = EventKind::kTicketResolved;
  e.timestamp = now;
  e.ticket_id = ticket_id;
  e.ta_id = t.ta_id;
  e.session_id = t.session_id.value_or("");
  commit(std::move(e));
  return require(ticket_id);
}

Ticket OfficeHoursQueue::cancel(const std::string& ticket_id, std::int64_t now) {
  const Ticket& t = require(ticket_id);
  if (t.status != TicketStatus::kPending) illegal(t, "cancel");
  QueueEvent e;
  e.kind = EventKind::kTicketCanceled;
  e.timestamp = now;
  e.ticket_id = ticket_id;
  commit(std::move(e));
  return require(ticket_id);
}

GroupSession OfficeHoursQueue::open_group(const std::string& ta_id, const std::string& assignment,
                                          const std::string& question, std::int64_t now) {
  if (ta_id.empty()) throw QueueError("invalid-argument", "ta_id is required");
  std::vector<std::string> members;
  for (const Ticket* t : state_.pending()) {
    if (t->assignment == assignment && t->question == question) members.push_back(t->ticket_id);
  }
  if (members.empty()) {
    throw QueueError("no-matching-tickets", "no pending tickets for " + assignment + "/" + question);
  }
  QueueEvent g;
  g.kind = EventKind::kGroupOpened;
  g.timestamp = now;
  g.session_id = "g" + std::to_string(state_.next_session());
  g.ta_id = ta_id;
  g.assignment = assignment;
  g.question = question;
  g.members = members;
  std::string session_id = g.session_id;
  commit(std::move(g));
  for (const auto& id : members) {
    QueueEvent a;
    a.kind = EventKind::kTicketAssigned;
    a.timestamp = now;
    a.ticket_id = id;
    a.ta_id = ta_id;
    a.session_id = session_id;
    commit(std::move(a));
    QueueEvent n;
    n.kind = EventKind::kNotificationSent;
    n.timestamp = now;
    n.ticket_id = id;
    n.student_id = require(id).student_id;
    n.ta_id = ta_id;
    n.session_id = session_id;
    commit(std::move(n));
  }
  return *state_.session(session_id);
}

std::vector<Ticket> OfficeHoursQueue::resolve_group(const std::string& session_id, const std::string& ta_id,
                                                    std::int64_t now, bool admin_override) {
  const GroupSession* s = state_.session(session_id);
  if (s == nullptr) throw QueueError("not-found", "no group session '" + session_id + "'");
  if (!s->open) throw QueueError("illegal-transition", "group session " + session_id + " is closed");
  if (s->ta_id != ta_id && !admin_override) {
    throw QueueError("forbidden", "group session " + session_id + " belongs to " + s->ta_id);
  }
  std::vector<std::string> members = s->member_ticket_ids;
  std::vector<Ticket> out;
  for (const auto& id : members) out.push_back(resolve(id, require(id).ta_id, now, true));
  return out;
}

std::string events_to_jsonl(const std::vector<QueueEvent>& events) {
  std::string out;
  for (const auto& e : events) {
    out += e.to_json().dump();
    out.push_back('\n');
  }
  return out;
}

std::vector<QueueEvent> events_from_jsonl(std::string_view text) {
  std::vector<QueueEvent> out;
  std::size_t pos = 0, line = 0;
  while (pos < text.size()) {
    auto end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    auto s = text.substr(pos, end - pos);
    pos = end + 1;
    ++line;
    if (s.empty()) continue;
    json j = json::parse(s, nullptr, false);
    if (j.is_discarded()) throw QueueError("invalid-argument", "event log line " + std::to_string(line) + ": malformed JSON");
    out.push_back(QueueEvent::from_json(j));
  }
  return out;
}

}  // namespace courseforge::ohq
