#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"

#include "courseforge/telemetry/snapshot.hpp"

namespace httplib {
class Server;
}

namespace courseforge::telemetry {

enum class PutOutcome { kAccepted, kDuplicate };

struct BackupSummary {
  std::string snapshot_hash;
  std::string student_id;
  std::string assignment_id;
  std::int64_t created_at = 0;
  SnapshotAnalytics analytics;

  nlohmann::json to_json() const;
};

// Content-addressed server store: objects/<hash>.json plus index.json. At
// most one stored copy per hash; every write lands via temp file + rename.
class BackupStore {
 public:
  explicit BackupStore(std::filesystem::path root);

  PutOutcome put(const Snapshot& snapshot);
  std::vector<BackupSummary> list(const std::string& student_id) const;
  std::size_t size() const;
  bool contains(const std::string& snapshot_hash) const;

  const std::filesystem::path& root() const { return root_; }

 private:
  void write_index_locked() const;

  std::filesystem::path root_;
  mutable std::mutex mu_;
  std::map<std::string, BackupSummary> index_;  // by hash
};

// HTTP front end for a BackupStore:
//   POST /api/backups            body: snapshot JSON -> {"status": "accepted"|"duplicate", "snapshot_hash"}
//   GET  /api/backups/{student}  -> [{snapshot_hash, created_at, analytics, ...}]
// When `token` is non-empty every request needs "Authorization: Bearer <token>".
class BackupServer {
 public:
  BackupServer(BackupStore& store, std::string token);
  ~BackupServer();
  BackupServer(const BackupServer&) = delete;
  BackupServer& operator=(const BackupServer&) = delete;

  // port 0 picks a free port. Returns the bound port; serves on a background
  // thread until stop().
  int start(const std::string& host, int port);
  // Blocks the calling thread.
  void listen(const std::string& host, int port);
  void stop();

  std::size_t request_count() const { return requests_.load(); }

 private:
  BackupStore& store_;
  std::string token_;
  std::unique_ptr<httplib::Server> server_;
  std::thread thread_;
  std::atomic<std::size_t> requests_{0};
};

// Client side of the backup API; tests substitute their own.
class BackupTransport {
 public:
  virtual ~BackupTransport() = default;
  // Throws courseforge::Error (retryable, "network") when the server cannot
  // be reached or answers with an unexpected status.
  virtual PutOutcome post(const Snapshot& snapshot) = 0;
};

class HttpBackupTransport final : public BackupTransport {
 public:
  // endpoint: "http://host:port"
  HttpBackupTransport(std::string endpoint, std::string token);
  PutOutcome post(const Snapshot& snapshot) override;

 private:
  std::string endpoint_;
  std::string token_;
};

struct SyncReceipt {
  bool skipped = false;
  std::vector<std::string> accepted;
  std::vector<std::string> duplicate;

  nlohmann::json to_json() const;
};

// Opted out: returns a skipped receipt without touching the transport.
SyncReceipt sync(const std::vector<Snapshot>& snapshots, BackupTransport& transport, bool opted_out);

// Local queue of snapshots awaiting upload, one file per hash.
class Outbox {
 public:
  explicit Outbox(std::filesystem::path dir);

  void enqueue(const Snapshot& snapshot);
  std::vector<Snapshot> pending() const;  // ordered by created_at, then hash
  void remove(const std::string& snapshot_hash);

 private:
  std::filesystem::path dir_;
};

// Pushes queued snapshots one by one, removing each once the server has it.
// A network failure propagates after the successful prefix was removed; the
// rest stays queued.
SyncReceipt sync_outbox(Outbox& outbox, BackupTransport& transport, bool opted_out);

}  // namespace courseforge::telemetry
