#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "courseforge/seating/assign.hpp"
#include "courseforge/seating/roster.hpp"

namespace courseforge::seating {

struct Email {
  std::string to;
  std::string subject;
  std::string body;

  friend bool operator==(const Email&, const Email&) = default;
};

// Placeholders: {{name}}, {{room}}, {{seat}}, {{exam}}. A first line of the
// form "Subject: ..." becomes the (also substituted) subject line.
// One message per plan entry, in student_id order. Nothing is sent.
std::vector<Email> render_emails(const SeatingPlan& plan, const Roster& roster, std::string_view template_text,
                                 std::string_view exam_name);

// {"to", "subject", "body"} per line.
std::string to_jsonl(const std::vector<Email>& batch);

}  // namespace courseforge::seating
