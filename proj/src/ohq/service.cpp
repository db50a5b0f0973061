#include "courseforge/ohq/service.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <filesystem>

#include "httplib.h"

#include "courseforge/common/files.hpp"
#include "courseforge/ohq/analytics.hpp"

namespace courseforge::ohq {

using nlohmann::json;

QueueService::QueueService(std::string log_path, Clock clock)
    : log_path_(std::move(log_path)), clock_(std::move(clock)) {
  if (log_path_.empty()) return;
  if (std::filesystem::exists(log_path_)) queue_ = OfficeHoursQueue::rebuild(events_from_jsonl(read_file(log_path_)));
  log_fd_ = ::open(log_path_.c_str(), O_WRONLY | O_CREAT | O_APPEND | O_CLOEXEC, 0644);
  if (log_fd_ < 0) throw user_error("io", "cannot open queue log '" + log_path_ + "': " + std::strerror(errno));
  queue_.set_sink([fd = log_fd_, path = log_path_](const QueueEvent& e) {
    std::string line = e.to_json().dump() + "\n";
    if (::write(fd, line.data(), line.size()) != static_cast<ssize_t>(line.size())) {
      throw user_error("io", "cannot append to queue log '" + path + "'");
    }
  });
}

QueueService::~QueueService() {
  shutdown();
  if (log_fd_ >= 0) ::close(log_fd_);
}

std::int64_t QueueService::now() const {
  if (clock_) return clock_();
  return std::chrono::duration_cast<std::chrono::seconds>(std::chrono::system_clock::now().time_since_epoch()).count();
}

std::vector<QueueEvent> QueueService::events_after(std::int64_t after_index, std::chrono::milliseconds timeout) {
  std::unique_lock lock(mu_);
  auto ready = [&] { return shutdown_.load() || queue_.state().last_index() > after_index; };
  cv_.wait_for(lock, timeout, ready);
  const auto& all = queue_.events();
  std::vector<QueueEvent> out;
  auto start = static_cast<std::size_t>(std::max<std::int64_t>(0, after_index));
  for (std::size_t i = start; i < all.size(); ++i) out.push_back(all[i]);
  return out;
}

void QueueService::shutdown() {
  {
    std::lock_guard lock(mu_);
    shutdown_ = true;
  }
  cv_.notify_all();
}

namespace {

void reply(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

int status_for(const Error& e) {
  const auto& code = e.code();
  if (code == "not-found") return 404;
  if (code == "forbidden") return 403;
  if (code == "duplicate-live-ticket" || code == "illegal-transition" || code == "not-head" ||
      code == "no-pending-tickets" || code == "no-matching-tickets") {
    return 409;
  }
  return 400;
}

json body_of(const httplib::Request& req) {
  if (req.body.empty()) return json::object();
  json j = json::parse(req.body, nullptr, false);
  if (j.is_discarded() || !j.is_object()) throw QueueError("invalid-argument", "request body must be a JSON object");
  return j;
}

std::string str_field(const json& j, const char* key, bool required = true) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) {
    if (required) throw QueueError("invalid-argument", std::string("missing field '") + key + "'");
    return "";
  }
  if (!it->is_string()) throw QueueError("invalid-argument", std::string("field '") + key + "' must be a string");
  return it->get<std::string>();
}

json queue_view(const OfficeHoursQueue& q) {
  json pending = json::array();
  std::int64_t position = 0;
  for (const Ticket* t : q.state().pending()) {
    json jt = t->to_json();
    jt["position"] = ++position;
    pending.push_back(std::move(jt));
  }
  json in_progress = json::array();
  for (const Ticket* t : q.state().in_progress()) in_progress.push_back(t->to_json());
  json sessions = json::array();
  for (const auto& [id, s] : q.state().sessions()) {
    if (s.open) sessions.push_back(s.to_json());
  }
  return {{"pending", std::move(pending)},
          {"in_progress", std::move(in_progress)},
          {"groups", std::move(sessions)},
          {"last_event_index", q.state().last_index()}};
}

}  // namespace

Role QueueHttpServer::role_of(const std::string& authorization) const {
  const std::string prefix = "Bearer ";
  if (authorization.rfind(prefix, 0) != 0) return Role::kNone;
  std::string token = authorization.substr(prefix.size());
  if (token.empty()) return Role::kNone;
  if (token == tokens_.admin) return Role::kAdmin;
  if (token == tokens_.ta) return Role::kTa;
  if (token == tokens_.student) return Role::kStudent;
  return Role::kNone;
}

QueueHttpServer::QueueHttpServer(QueueService& service, RoleTokens tokens, std::string ui_dir)
    : service_(service), tokens_(std::move(tokens)), server_(std::make_unique<httplib::Server>()) {
  auto& srv = *server_;
  if (!ui_dir.empty()) srv.set_mount_point("/", ui_dir);

  // Wraps a handler with role checking and error-to-status mapping.
  auto guarded = [this](std::initializer_list<Role> allowed,
                        std::function<void(const httplib::Request&, httplib::Response&, Role)> fn) {
    std::vector<Role> roles(allowed);
    return [this, roles, fn](const httplib::Request& req, httplib::Response& res) {
      Role role = role_of(req.get_header_value("Authorization"));
      if (role == Role::kNone) return reply(res, 401, {{"error", "unauthorized"}, {"code", "unauthorized"}});
      if (std::find(roles.begin(), roles.end(), role) == roles.end()) {
        return reply(res, 403, {{"error", "role not permitted"}, {"code", "forbidden"}});
      }
      try {
        fn(req, res, role);
      } catch (const Error& e) {
        reply(res, status_for(e), {{"error", e.what()}, {"code", e.code()}});
      }
    };
  };
  const auto any = {Role::kStudent, Role::kTa, Role::kAdmin};
  const auto staff = {Role::kTa, Role::kAdmin};
  const auto students = {Role::kStudent, Role::kAdmin};

  srv.Post("/api/tickets", guarded(students, [this](const auto& req, auto& res, Role) {
    json b = body_of(req);
    Ticket t = service_.mutate([&](OfficeHoursQueue& q, std::int64_t now) {
      return q.create_ticket(str_field(b, "student_id"), str_field(b, "assignment"), str_field(b, "question"),
                             str_field(b, "location", false), str_field(b, "description", false), now);
    });
    reply(res, 201, t.to_json());
  }));

  srv.Get("/api/queue", guarded(any, [this](const auto&, auto& res, Role) {
    reply(res, 200, service_.read([](const OfficeHoursQueue& q) { return queue_view(q); }));
  }));

  srv.Post(R"(/api/tickets/([A-Za-z0-9_-]+)/take)", guarded(staff, [this](const auto& req, auto& res, Role) {
    json b = body_of(req);
    std::string id = req.matches[1].str();
    std::string ta = str_field(b, "ta_id");
    Ticket t = service_.mutate([&](OfficeHoursQueue& q, std::int64_t now) {
      return id == "next" ? q.take_next(ta, now) : q.take(id, ta, now);
    });
    reply(res, 200, t.to_json());
  }));

  srv.Post(R"(/api/tickets/([A-Za-z0-9_-]+)/resolve)", guarded(staff, [this](const auto& req, auto& res, Role role) {
    json b = body_of(req);
    std::string id = req.matches[1].str();
    bool override_requested = b.value("admin_override", false);
    if (override_requested && role != Role::kAdmin) throw QueueError("forbidden", "admin_override requires the admin role");
    std::string ta = str_field(b, "ta_id", !override_requested);
    Ticket t = service_.mutate([&](OfficeHoursQueue& q, std::int64_t now) {
      return q.resolve(id, ta, now, override_requested);
    });
    reply(res, 200, t.to_json());
  }));

  srv.Post(R"(/api/tickets/([A-Za-z0-9_-]+)/requeue)", guarded(staff, [this](const auto& req, auto& res, Role) {
    std::string id = req.matches[1].str();
    Ticket t = service_.mutate([&](OfficeHoursQueue& q, std::int64_t now) { return q.requeue(id, now); });
    reply(res, 200, t.to_json());
  }));

  srv.Post(R"(/api/tickets/([A-Za-z0-9_-]+)/cancel)", guarded(students, [this](const auto& req, auto& res, Role role) {
    json b = body_of(req);
    std::string id = req.matches[1].str();
    std::string student = str_field(b, "student_id", role != Role::kAdmin);
    Ticket t = service_.mutate([&](OfficeHoursQueue& q, std::int64_t now) {
      const Ticket* existing = q.state().find(id);
      if (existing && role != Role::kAdmin && existing->student_id != student) {
        throw QueueError("forbidden", "ticket " + id + " belongs to another student");
      }
      return q.cancel(id, now);
    });
    reply(res, 200, t.to_json());
  }));

  srv.Post("/api/groups", guarded(staff, [this](const auto& req, auto& res, Role) {
    json b = body_of(req);
    GroupSession s = service_.mutate([&](OfficeHoursQueue& q, std::int64_t now) {
      return q.open_group(str_field(b, "ta_id"), str_field(b, "assignment"), str_field(b, "question"), now);
    });
    reply(res, 201, s.to_json());
  }));

  srv.Post(R"(/api/groups/([A-Za-z0-9_-]+)/resolve)", guarded(staff, [this](const auto& req, auto& res, Role role) {
    json b = body_of(req);
    std::string id = req.matches[1].str();
    bool override_requested = b.value("admin_override", false);
    if (override_requested && role != Role::kAdmin) throw QueueError("forbidden", "admin_override requires the admin role");
    std::string ta = str_field(b, "ta_id", !override_requested);
    auto tickets = service_.mutate([&](OfficeHoursQueue& q, std::int64_t now) {
      return q.resolve_group(id, ta, now, override_requested);
    });
    json out = json::array();
    for (const auto& t : tickets) out.push_back(t.to_json());
    reply(res, 200, out);
  }));

  srv.Get("/api/stats", guarded(any, [this](const auto& req, auto& res, Role) {
    std::optional<std::int64_t> roster;
    if (req.has_param("roster_size")) {
      try {
        roster = std::stoll(req.get_param_value("roster_size"));
      } catch (const std::exception&) {
        throw QueueError("invalid-argument", "roster_size must be an integer");
      }
    }
    auto events = service_.read([](const OfficeHoursQueue& q) { return q.events(); });
    bool any_ticket = std::any_of(events.begin(), events.end(),
                                  [](const QueueEvent& e) { return e.kind == EventKind::kTicketCreated; });
    reply(res, 200, {{"concentration", any_ticket ? concentration(events, roster).to_json() : json(nullptr)},
                     {"wait_stats", to_json(wait_stats(events))}});
  }));

  srv.Get("/api/events", guarded(any, [this](const auto& req, auto& res, Role) {
    std::int64_t since = 0;
    std::int64_t limit = -1;
    try {
      if (req.has_param("since")) since = std::stoll(req.get_param_value("since"));
      else if (req.has_header("Last-Event-ID")) since = std::stoll(req.get_header_value("Last-Event-ID"));
      if (req.has_param("limit")) limit = std::stoll(req.get_param_value("limit"));
    } catch (const std::exception&) {
      throw QueueError("invalid-argument", "since/limit must be integers");
    }
    res.set_header("Cache-Control", "no-cache");
    res.set_chunked_content_provider(
        "text/event-stream", [this, since, limit, sent = std::int64_t{0}](std::size_t, httplib::DataSink& sink) mutable {
          auto events = service_.events_after(since, std::chrono::milliseconds(250));
          for (const auto& e : events) {
            if (limit >= 0 && sent >= limit) break;
            std::string msg = "id: " + std::to_string(e.index) + "\nevent: " + std::string(to_string(e.kind)) +
                              "\ndata: " + e.to_json().dump() + "\n\n";
            if (!sink.write(msg.data(), msg.size())) return false;
            since = e.index;
            ++sent;
          }
          if ((limit >= 0 && sent >= limit) || service_.shutting_down()) {
            sink.done();
            return true;
          }
          if (events.empty()) {
            static constexpr char kKeepAlive[] = ": keep-alive\n\n";
            if (!sink.write(kKeepAlive, sizeof kKeepAlive - 1)) return false;
          }
          return true;
        });
  }));
}

QueueHttpServer::~QueueHttpServer() { stop(); }

int QueueHttpServer::start(const std::string& host, int port) {
  int bound = port == 0 ? server_->bind_to_any_port(host) : (server_->bind_to_port(host, port) ? port : -1);
  if (bound < 0) throw user_error("bind", "cannot bind " + host + ":" + std::to_string(port));
  thread_ = std::thread([this] { server_->listen_after_bind(); });
  server_->wait_until_ready();
  return bound;
}

void QueueHttpServer::listen(const std::string& host, int port) {
  if (!server_->listen(host, port)) throw user_error("bind", "cannot listen on " + host + ":" + std::to_string(port));
}

void QueueHttpServer::stop() {
  service_.shutdown();
  if (server_) server_->stop();
  if (thread_.joinable()) thread_.join();
}

}  // namespace courseforge::ohq
