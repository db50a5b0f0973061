#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace courseforge::testkit {

// CRLF and lone CR become LF, trailing whitespace is stripped from every
// line, and trailing blank lines are dropped.
std::vector<std::string> normalize_output(std::string_view raw);

std::string join_lines(const std::vector<std::string>& lines);

}  // namespace courseforge::testkit
