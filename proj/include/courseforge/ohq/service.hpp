#pragma once

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "courseforge/ohq/queue.hpp"

namespace httplib {
class Server;
}

namespace courseforge::ohq {

// Thread-safe owner of one queue. Every mutation runs under a single lock
// (one logical writer), is appended to the on-disk event log before the call
// returns, and is published to subscribers in commit order.
class QueueService {
 public:
  using Clock = std::function<std::int64_t()>;

  // Empty log_path: in-memory only. An existing log is replayed on start-up.
  explicit QueueService(std::string log_path = "", Clock clock = nullptr);
  ~QueueService();

  // Runs `op` against the queue under the writer lock.
  template <typename F>
  auto mutate(F&& op) {
    std::unique_lock lock(mu_);
    auto before = queue_.events().size();
    struct Notify {
      QueueService* self;
      std::size_t before;
      ~Notify() {
        if (self->queue_.events().size() != before) self->cv_.notify_all();
      }
    } notify{this, before};
    return op(queue_, now());
  }

  // Consistent snapshot for readers.
  template <typename F>
  auto read(F&& op) const {
    std::lock_guard lock(mu_);
    return op(queue_);
  }

  // Events with index > after_index, waiting up to `timeout` for at least one.
  std::vector<QueueEvent> events_after(std::int64_t after_index, std::chrono::milliseconds timeout);

  void shutdown();
  bool shutting_down() const { return shutdown_.load(); }

 private:
  std::int64_t now() const;

  mutable std::mutex mu_;
  std::condition_variable cv_;
  OfficeHoursQueue queue_;
  std::string log_path_;
  int log_fd_ = -1;
  Clock clock_;
  std::atomic<bool> shutdown_{false};
};

struct RoleTokens {
  std::string student;
  std::string ta;
  std::string admin;
};

enum class Role { kNone, kStudent, kTa, kAdmin };

// HTTP front end for a QueueService. Clients send "Authorization: Bearer
// <token>"; the token decides the role.
//   POST /api/tickets                  student|admin  create
//   GET  /api/queue                    any role       pending (seq order) + in progress
//   POST /api/tickets/{id}/take        ta|admin       {id} = "next" or the head ticket
//   POST /api/tickets/{id}/resolve     ta|admin
//   POST /api/tickets/{id}/requeue     ta|admin
//   POST /api/tickets/{id}/cancel      student|admin
//   POST /api/groups                   ta|admin       open group session
//   POST /api/groups/{id}/resolve      ta|admin
//   GET  /api/stats[?roster_size=N]    any role
//   GET  /api/events[?since=N]         any role       server-sent events, one JSON event per message
class QueueHttpServer {
 public:
  QueueHttpServer(QueueService& service, RoleTokens tokens, std::string ui_dir = "");
  ~QueueHttpServer();
  QueueHttpServer(const QueueHttpServer&) = delete;
  QueueHttpServer& operator=(const QueueHttpServer&) = delete;

  int start(const std::string& host, int port);  // background thread; port 0 = any
  void listen(const std::string& host, int port);  // blocking
  void stop();

 private:
  Role role_of(const std::string& authorization) const;

  QueueService& service_;
  RoleTokens tokens_;
  std::unique_ptr<httplib::Server> server_;
  std::thread thread_;
};

}  // namespace courseforge::ohq
