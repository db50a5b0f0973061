#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace courseforge::csv {

struct Row {
  std::size_t line = 0;  // 1-based physical line where the record starts
  std::vector<std::string> fields;
};

// RFC 4180 subset: comma separator, double-quote quoting with "" escapes,
// LF or CRLF record terminators. Blank lines are skipped.
std::vector<Row> parse(std::string_view text);

// Quotes only when the field contains a comma, quote, CR or LF.
std::string escape(std::string_view field);
std::string join(const std::vector<std::string>& fields);

}  // namespace courseforge::csv
