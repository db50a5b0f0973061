#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "courseforge/telemetry/velocity.hpp"
#include "json.hpp"

namespace courseforge::cli {

// JSON config file. Every field is optional:
// {
//   "course_id": "cs61a",
//   "student_id": "s123",
//   "backup_endpoint": "http://host:port",
//   "queue_endpoint": "http://host:port",
//   "token": "...",
//   "velocity": {"max_attempts": 10, "window_seconds": 900},
//   "default_pattern": "every-other:0",
//   "state_dir": ".courseforge"
// }
struct Config {
  std::string course_id;
  std::string student_id;
  std::string backup_endpoint;
  std::string queue_endpoint;
  std::string token;
  telemetry::VelocityConfig velocity;
  std::string default_pattern = "all";
  std::string state_dir = ".courseforge";
};

// Unknown keys, malformed endpoints and invalid velocity settings are user errors.
Config parse_config(std::string_view document);
Config load_config(const std::filesystem::path& path);

// Flag, then COURSEFORGE_TOKEN, then the config file.
std::string resolve_token(const std::string& flag, const Config& config);

// "http://host[:port]" or "https://..." with no path.
bool is_endpoint(std::string_view url);

struct Streams {
  std::istream& in;
  std::ostream& out;
  std::ostream& err;
};

// Runs one command line (without the program name). Returns the exit status:
// 0 success, 2 usage or input error, 1 domain failure (failing tests,
// infeasible plan, audit violations, ...). Errors are reported on `err` as a
// single line "error: <code>: <message>".
int dispatch(const std::vector<std::string>& args, Streams io);

}  // namespace courseforge::cli
