#include "courseforge/telemetry/backup.hpp"

#include <algorithm>

#include "httplib.h"

#include "courseforge/common/error.hpp"
#include "courseforge/common/files.hpp"

namespace courseforge::telemetry {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json analytics_json(const SnapshotAnalytics& a) {
  return {{"current_question", a.current_question},
          {"run_count_so_far", a.run_count_so_far},
          {"last_result_passed", a.last_result_passed ? json(*a.last_result_passed) : json(nullptr)}};
}

BackupSummary summary_from_json(const json& j) {
  BackupSummary s;
  s.snapshot_hash = j.at("snapshot_hash").get<std::string>();
  s.student_id = j.at("student_id").get<std::string>();
  s.assignment_id = j.at("assignment_id").get<std::string>();
  s.created_at = j.at("created_at").get<std::int64_t>();
  const json& a = j.at("analytics");
  s.analytics.current_question = a.at("current_question").get<std::string>();
  s.analytics.run_count_so_far = a.at("run_count_so_far").get<std::int64_t>();
  if (!a.at("last_result_passed").is_null()) s.analytics.last_result_passed = a.at("last_result_passed").get<bool>();
  return s;
}

bool authorized(const httplib::Request& req, const std::string& token) {
  return token.empty() || req.get_header_value("Authorization") == "Bearer " + token;
}

void reply(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

}  // namespace

json BackupSummary::to_json() const {
  return {{"snapshot_hash", snapshot_hash},
          {"student_id", student_id},
          {"assignment_id", assignment_id},
          {"created_at", created_at},
          {"analytics", analytics_json(analytics)}};
}

BackupStore::BackupStore(fs::path root) : root_(std::move(root)) {
  fs::create_directories(root_ / "objects");
  auto index_path = root_ / "index.json";
  if (fs::exists(index_path)) {
    try {
      json doc = json::parse(read_file(index_path));
      for (const auto& j : doc.at("entries")) {
        auto s = summary_from_json(j);
        index_.emplace(s.snapshot_hash, std::move(s));
      }
    } catch (const json::exception& e) {
      throw user_error("backup-store", std::string("corrupt index: ") + e.what());
    }
  }
}

void BackupStore::write_index_locked() const {
  json entries = json::array();
  for (const auto& [hash, s] : index_) entries.push_back(s.to_json());
  write_file_atomic(root_ / "index.json", json{{"entries", std::move(entries)}}.dump(1) + "\n");
}

PutOutcome BackupStore::put(const Snapshot& snapshot) {
  if (hash_files(snapshot.files) != snapshot.snapshot_hash) {
    throw user_error("snapshot", "snapshot_hash does not match file contents");
  }
  std::lock_guard lock(mu_);
  if (index_.count(snapshot.snapshot_hash)) return PutOutcome::kDuplicate;
  write_file_atomic(root_ / "objects" / (snapshot.snapshot_hash + ".json"), snapshot.to_json().dump() + "\n");
  BackupSummary s{snapshot.snapshot_hash, snapshot.student_id, snapshot.assignment_id,
                  snapshot.created_at, snapshot.analytics};
  index_.emplace(s.snapshot_hash, s);
  write_index_locked();
  return PutOutcome::kAccepted;
}

std::vector<BackupSummary> BackupStore::list(const std::string& student_id) const {
  std::lock_guard lock(mu_);
  std::vector<BackupSummary> out;
  for (const auto& [hash, s] : index_) {
    if (s.student_id == student_id) out.push_back(s);
  }
  std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.created_at < b.created_at; });
  return out;
}

std::size_t BackupStore::size() const {
  std::lock_guard lock(mu_);
  return index_.size();
}

bool BackupStore::contains(const std::string& snapshot_hash) const {
  std::lock_guard lock(mu_);
  return index_.count(snapshot_hash) > 0;
}

BackupServer::BackupServer(BackupStore& store, std::string token)
    : store_(store), token_(std::move(token)), server_(std::make_unique<httplib::Server>()) {
  server_->set_pre_routing_handler([this](const httplib::Request& req, httplib::Response& res) {
    ++requests_;
    if (!authorized(req, token_)) {
      reply(res, 401, {{"error", "unauthorized"}});
      return httplib::Server::HandlerResponse::Handled;
    }
    return httplib::Server::HandlerResponse::Unhandled;
  });
  server_->Post("/api/backups", [this](const httplib::Request& req, httplib::Response& res) {
    try {
      auto snap = Snapshot::from_json(json::parse(req.body));
      auto outcome = store_.put(snap);
      reply(res, outcome == PutOutcome::kAccepted ? 201 : 200,
            {{"status", outcome == PutOutcome::kAccepted ? "accepted" : "duplicate"},
             {"snapshot_hash", snap.snapshot_hash}});
    } catch (const json::exception& e) {
      reply(res, 400, {{"error", std::string("malformed JSON: ") + e.what()}});
    } catch (const Error& e) {
      reply(res, 400, {{"error", e.what()}});
    }
  });
  server_->Get(R"(/api/backups/([A-Za-z0-9_.@-]+))", [this](const httplib::Request& req, httplib::Response& res) {
    json out = json::array();
    for (const auto& s : store_.list(req.matches[1].str())) out.push_back(s.to_json());
    reply(res, 200, out);
  });
}

BackupServer::~BackupServer() { stop(); }

int BackupServer::start(const std::string& host, int port) {
  int bound = port == 0 ? server_->bind_to_any_port(host) : (server_->bind_to_port(host, port) ? port : -1);
  if (bound < 0) throw user_error("bind", "cannot bind " + host + ":" + std::to_string(port));
  thread_ = std::thread([this] { server_->listen_after_bind(); });
  server_->wait_until_ready();
  return bound;
}

void BackupServer::listen(const std::string& host, int port) {
  if (!server_->listen(host, port)) throw user_error("bind", "cannot listen on " + host + ":" + std::to_string(port));
}

void BackupServer::stop() {
  if (server_) server_->stop();
  if (thread_.joinable()) thread_.join();
}

HttpBackupTransport::HttpBackupTransport(std::string endpoint, std::string token)
    : endpoint_(std::move(endpoint)), token_(std::move(token)) {}

PutOutcome HttpBackupTransport::post(const Snapshot& snapshot) {
  httplib::Client client(endpoint_);
  if (!client.is_valid()) throw user_error("endpoint", "invalid backup endpoint '" + endpoint_ + "'");
  client.set_connection_timeout(5);
  client.set_read_timeout(30);
  httplib::Headers headers;
  if (!token_.empty()) headers.emplace("Authorization", "Bearer " + token_);
  auto res = client.Post("/api/backups", headers, snapshot.to_json().dump(), "application/json");
  if (!res) {
    throw Error(ErrorCategory::kRetryable, "network",
                "backup server unreachable: " + httplib::to_string(res.error()));
  }
  if (res->status == 201 || res->status == 200) {
    auto body = json::parse(res->body, nullptr, false);
    if (!body.is_discarded() && body.value("status", "") == "duplicate") return PutOutcome::kDuplicate;
    return PutOutcome::kAccepted;
  }
  throw Error(ErrorCategory::kRetryable, "network",
              "backup server answered HTTP " + std::to_string(res->status) + ": " + res->body);
}

json SyncReceipt::to_json() const {
  return {{"skipped", skipped}, {"accepted", accepted}, {"duplicate", duplicate}};
}

SyncReceipt sync(const std::vector<Snapshot>& snapshots, BackupTransport& transport, bool opted_out) {
  SyncReceipt receipt;
  if (opted_out) {
    receipt.skipped = true;
    return receipt;
  }
  for (const auto& s : snapshots) {
    auto outcome = transport.post(s);
    (outcome == PutOutcome::kAccepted ? receipt.accepted : receipt.duplicate).push_back(s.snapshot_hash);
  }
  return receipt;
}

Outbox::Outbox(fs::path dir) : dir_(std::move(dir)) { fs::create_directories(dir_); }

void Outbox::enqueue(const Snapshot& snapshot) {
  write_file_atomic(dir_ / (snapshot.snapshot_hash + ".json"), snapshot.to_json().dump() + "\n");
}

std::vector<Snapshot> Outbox::pending() const {
  std::vector<Snapshot> out;
  for (const auto& entry : fs::directory_iterator(dir_)) {
    if (entry.path().extension() != ".json") continue;
    try {
      out.push_back(Snapshot::from_json(json::parse(read_file(entry.path()))));
    } catch (const json::exception&) {
      throw user_error("outbox", "corrupt queued snapshot '" + entry.path().string() + "'");
    }
  }
  std::sort(out.begin(), out.end(), [](const Snapshot& a, const Snapshot& b) {
    return std::tie(a.created_at, a.snapshot_hash) < std::tie(b.created_at, b.snapshot_hash);
  });
  return out;
}

void Outbox::remove(const std::string& snapshot_hash) {
  std::error_code ec;
  fs::remove(dir_ / (snapshot_hash + ".json"), ec);
}

SyncReceipt sync_outbox(Outbox& outbox, BackupTransport& transport, bool opted_out) {
  SyncReceipt receipt;
  if (opted_out) {
    receipt.skipped = true;
    return receipt;
  }
  for (const auto& s : outbox.pending()) {
    auto outcome = transport.post(s);
    (outcome == PutOutcome::kAccepted ? receipt.accepted : receipt.duplicate).push_back(s.snapshot_hash);
    outbox.remove(s.snapshot_hash);
  }
  return receipt;
}

}  // namespace courseforge::telemetry
