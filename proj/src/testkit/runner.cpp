#include "courseforge/testkit/runner.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

#include <array>
#include <cctype>
#include <cerrno>
#include <cstring>
#include <mutex>
#include <thread>

#include "courseforge/testkit/normalize.hpp"

extern char** environ;

namespace courseforge::testkit {

namespace {

using Clock = std::chrono::steady_clock;

class Fd {
 public:
  Fd() = default;
  explicit Fd(int fd) : fd_(fd) {}
  Fd(const Fd&) = delete;
  Fd& operator=(const Fd&) = delete;
  Fd(Fd&& other) noexcept : fd_(std::exchange(other.fd_, -1)) {}
  Fd& operator=(Fd&& other) noexcept {
    if (this != &other) {
      reset();
      fd_ = std::exchange(other.fd_, -1);
    }
    return *this;
  }
  ~Fd() { reset(); }

  int get() const { return fd_; }
  explicit operator bool() const { return fd_ >= 0; }
  void reset() {
    if (fd_ >= 0) ::close(fd_);
    fd_ = -1;
  }

 private:
  int fd_ = -1;
};

struct Pipe {
  Fd read_end;
  Fd write_end;
};

Pipe make_pipe() {
  int fds[2];
  if (::pipe2(fds, O_CLOEXEC) != 0) {
    throw std::runtime_error(std::string("pipe2: ") + std::strerror(errno));
  }
  return {Fd(fds[0]), Fd(fds[1])};
}

void set_nonblocking(int fd) { ::fcntl(fd, F_SETFL, ::fcntl(fd, F_GETFL) | O_NONBLOCK); }

int decode_status(int status) {
  if (WIFEXITED(status)) return WEXITSTATUS(status);
  if (WIFSIGNALED(status)) return 128 + WTERMSIG(status);
  return -1;
}

class SpawnAttrs {
 public:
  SpawnAttrs() {
    posix_spawn_file_actions_init(&actions_);
    posix_spawnattr_init(&attr_);
  }
  ~SpawnAttrs() {
    posix_spawn_file_actions_destroy(&actions_);
    posix_spawnattr_destroy(&attr_);
  }
  SpawnAttrs(const SpawnAttrs&) = delete;
  SpawnAttrs& operator=(const SpawnAttrs&) = delete;

  posix_spawn_file_actions_t actions_;
  posix_spawnattr_t attr_;
};

}  // namespace

SubjectCommand SubjectCommand::parse(std::string_view line) {
  SubjectCommand cmd;
  std::string word;
  bool in_word = false;
  char quote = 0;
  for (std::size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (quote == '\'') {
      if (c == '\'') quote = 0;
      else word.push_back(c);
    } else if (quote == '"') {
      if (c == '"') {
        quote = 0;
      } else if (c == '\\' && i + 1 < line.size() && std::strchr("\"\\$`", line[i + 1])) {
        word.push_back(line[++i]);
      } else {
        word.push_back(c);
      }
    } else if (c == '\'' || c == '"') {
      quote = c;
      in_word = true;
    } else if (c == '\\' && i + 1 < line.size()) {
      word.push_back(line[++i]);
      in_word = true;
    } else if (c == ' ' || c == '\t' || c == '\n') {
      if (in_word) cmd.argv.push_back(std::move(word));
      word.clear();
      in_word = false;
    } else {
      word.push_back(c);
      in_word = true;
    }
  }
  if (quote != 0) throw user_error("subject", "unterminated quote in subject command");
  if (in_word) cmd.argv.push_back(std::move(word));
  if (cmd.argv.empty()) throw user_error("subject", "empty subject command");
  return cmd;
}

ProcessExecutor::ProcessExecutor() {
  static std::once_flag once;
  std::call_once(once, [] { ::signal(SIGPIPE, SIG_IGN); });
}

ExecOutcome ProcessExecutor::execute(const SubjectCommand& subject, std::string_view input,
                                     std::chrono::milliseconds timeout) {
  if (subject.argv.empty()) throw user_error("subject", "empty subject command");

  Pipe in = make_pipe();
  Pipe out = make_pipe();
  Pipe err = make_pipe();

  SpawnAttrs spawn;
  posix_spawn_file_actions_adddup2(&spawn.actions_, in.read_end.get(), STDIN_FILENO);
  posix_spawn_file_actions_adddup2(&spawn.actions_, out.write_end.get(), STDOUT_FILENO);
  posix_spawn_file_actions_adddup2(&spawn.actions_, err.write_end.get(), STDERR_FILENO);
  if (!subject.working_dir.empty()) {
#if defined(__GLIBC__) && (__GLIBC__ > 2 || (__GLIBC__ == 2 && __GLIBC_MINOR__ >= 29))
    posix_spawn_file_actions_addchdir_np(&spawn.actions_, subject.working_dir.c_str());
#else
    throw user_error("subject", "working_dir requires glibc >= 2.29");
#endif
  }
  // Own process group, so a timeout kills grandchildren too.
  posix_spawnattr_setflags(&spawn.attr_, POSIX_SPAWN_SETPGROUP);
  posix_spawnattr_setpgroup(&spawn.attr_, 0);

  std::vector<char*> argv;
  for (const auto& a : subject.argv) argv.push_back(const_cast<char*>(a.c_str()));
  argv.push_back(nullptr);

  auto started = Clock::now();
  pid_t pid = 0;
  int rc = ::posix_spawnp(&pid, argv[0], &spawn.actions_, &spawn.attr_, argv.data(), environ);
  if (rc != 0) {
    throw LaunchError("cannot launch '" + subject.argv[0] + "': " + std::strerror(rc));
  }
  ++launches_;

  in.read_end.reset();
  out.write_end.reset();
  err.write_end.reset();
  set_nonblocking(in.write_end.get());
  set_nonblocking(out.read_end.get());
  set_nonblocking(err.read_end.get());

  ExecOutcome result;
  auto deadline = started + timeout;
  std::size_t written = 0;
  if (input.empty()) in.write_end.reset();

  std::array<char, 8192> buf{};
  while (out.read_end || err.read_end) {
    auto now = Clock::now();
    if (now >= deadline) {
      result.timed_out = true;
      break;
    }
    std::vector<pollfd> fds;
    if (in.write_end) fds.push_back({in.write_end.get(), POLLOUT, 0});
    if (out.read_end) fds.push_back({out.read_end.get(), POLLIN, 0});
    if (err.read_end) fds.push_back({err.read_end.get(), POLLIN, 0});
    auto remaining = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - now).count() + 1;
    int n = ::poll(fds.data(), fds.size(), static_cast<int>(remaining));
    if (n < 0 && errno != EINTR) break;
    for (const auto& p : fds) {
      if (p.revents == 0) continue;
      if (in.write_end && p.fd == in.write_end.get()) {
        ssize_t w = ::write(p.fd, input.data() + written, input.size() - written);
        if (w > 0) written += static_cast<std::size_t>(w);
        if (w < 0 && errno != EAGAIN) written = input.size();  // subject closed stdin
        if (written >= input.size()) in.write_end.reset();
        continue;
      }
      Fd& src = (out.read_end && p.fd == out.read_end.get()) ? out.read_end : err.read_end;
      std::string& dst = (&src == &out.read_end) ? result.stdout_text : result.stderr_text;
      ssize_t r = ::read(p.fd, buf.data(), buf.size());
      if (r > 0) {
        dst.append(buf.data(), static_cast<std::size_t>(r));
      } else if (r == 0 || errno != EAGAIN) {
        src.reset();
      }
    }
  }
  in.write_end.reset();

  int status = 0;
  while (!result.timed_out) {
    pid_t w = ::waitpid(pid, &status, WNOHANG);
    if (w == pid) break;
    if (w < 0 && errno != EINTR) break;
    if (Clock::now() >= deadline) {
      result.timed_out = true;
      break;
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(1));
  }
  if (result.timed_out) {
    ::kill(-pid, SIGKILL);
    ::waitpid(pid, &status, 0);
  }
  result.exit_code = decode_status(status);
  result.elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(Clock::now() - started);
  return result;
}

std::string_view outcome_name(const Outcome& outcome) {
  static constexpr std::string_view kNames[] = {"Pass",   "Fail",         "Timeout",
                                                "Locked", "SubjectError", "NotRun"};
  return kNames[outcome.index()];
}

std::size_t first_divergence(const std::vector<std::string>& expected,
                             const std::vector<std::string>& actual) {
  std::size_t n = std::min(expected.size(), actual.size());
  for (std::size_t i = 0; i < n; ++i) {
    if (expected[i] != actual[i]) return i;
  }
  return n;
}

CaseResult run_case(const TestCase& test_case, const SubjectCommand& subject,
                    SubjectExecutor& executor) {
  if (!test_case.expected_lines) return {test_case.id, Locked{}};

  ExecOutcome exec = executor.execute(subject, test_case.stdin_text,
                                      std::chrono::milliseconds(test_case.timeout_ms));
  if (exec.timed_out) return {test_case.id, Timeout{}};

  auto actual = normalize_output(exec.stdout_text);
  auto expected = normalize_output(join_lines(*test_case.expected_lines));
  auto folded = [&](std::vector<std::string> lines) {
    if (test_case.case_insensitive) {
      for (auto& l : lines) {
        for (auto& ch : l) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
      }
    }
    return lines;
  };
  auto cmp_actual = folded(actual);
  auto cmp_expected = folded(std::move(expected));
  if (cmp_actual == cmp_expected) return {test_case.id, Pass{}};
  if (exec.exit_code != 0) return {test_case.id, SubjectError{exec.exit_code}};
  auto index = first_divergence(cmp_expected, cmp_actual);
  return {test_case.id, Fail{std::move(actual), index}};
}

CaseResult run_case(const TestCase& test_case, const SubjectCommand& subject) {
  ProcessExecutor executor;
  return run_case(test_case, subject, executor);
}

}  // namespace courseforge::testkit
