#include <regex>

#include "courseforge/cli/cli.hpp"
#include "courseforge/common/error.hpp"
#include "courseforge/common/files.hpp"
#include "courseforge/seating/pattern.hpp"

namespace courseforge::cli {

using nlohmann::json;

bool is_endpoint(std::string_view url) {
  static const std::regex re(R"(^https?://[A-Za-z0-9.\-]+(:[0-9]{1,5})?/?$)");
  return std::regex_match(url.begin(), url.end(), re);
}

Config parse_config(std::string_view document) {
  json j = json::parse(document, nullptr, false);
  if (j.is_discarded() || !j.is_object()) throw user_error("config", "config is not a JSON object");
  Config c;
  auto str = [&](const char* key, std::string& field) {
    if (auto it = j.find(key); it != j.end()) {
      if (!it->is_string()) throw user_error("config", std::string("'") + key + "' must be a string");
      field = it->get<std::string>();
    }
  };
  for (const auto& [key, _] : j.items()) {
    static const char* known[] = {"course_id", "student_id", "backup_endpoint", "queue_endpoint",
                                  "token", "velocity", "default_pattern", "state_dir"};
    if (std::find(std::begin(known), std::end(known), key) == std::end(known)) {
      throw user_error("config", "unknown key '" + key + "'");
    }
  }
  str("course_id", c.course_id);
  str("student_id", c.student_id);
  str("backup_endpoint", c.backup_endpoint);
  str("queue_endpoint", c.queue_endpoint);
  str("token", c.token);
  str("default_pattern", c.default_pattern);
  str("state_dir", c.state_dir);
  for (const auto* ep : {&c.backup_endpoint, &c.queue_endpoint}) {
    if (!ep->empty() && !is_endpoint(*ep)) throw user_error("config", "malformed endpoint '" + *ep + "'");
  }
  if (auto v = j.find("velocity"); v != j.end()) {
    try {
      c.velocity.max_attempts = v->value("max_attempts", c.velocity.max_attempts);
      c.velocity.window_seconds = v->value("window_seconds", c.velocity.window_seconds);
    } catch (const json::exception& e) {
      throw user_error("config", std::string("bad velocity settings: ") + e.what());
    }
  }
  c.velocity.validate();
  seating::UsabilityPattern::parse(c.default_pattern);
  return c;
}

Config load_config(const std::filesystem::path& path) { return parse_config(read_file(path)); }

}  // namespace courseforge::cli
