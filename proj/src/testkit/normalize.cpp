#include "courseforge/testkit/normalize.hpp"

namespace courseforge::testkit {

std::vector<std::string> normalize_output(std::string_view raw) {
  std::vector<std::string> lines;
  std::string current;
  auto flush = [&] {
    auto end = current.find_last_not_of(" \t\v\f");
    current.erase(end == std::string::npos ? 0 : end + 1);
    lines.push_back(std::move(current));
    current.clear();
  };
  for (std::size_t i = 0; i < raw.size(); ++i) {
    char c = raw[i];
    if (c == '\r') {
      if (i + 1 < raw.size() && raw[i + 1] == '\n') ++i;
      flush();
    } else if (c == '\n') {
      flush();
    } else {
      current.push_back(c);
    }
  }
  flush();
  while (!lines.empty() && lines.back().empty()) lines.pop_back();
  return lines;
}

std::string join_lines(const std::vector<std::string>& lines) {
  std::string out;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (i) out.push_back('\n');
    out += lines[i];
  }
  return out;
}

}  // namespace courseforge::testkit
