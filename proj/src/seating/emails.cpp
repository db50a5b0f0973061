#include "courseforge/seating/emails.hpp"

#include <map>

#include "courseforge/common/error.hpp"

namespace courseforge::seating {

namespace {

constexpr std::string_view kDefaultSubject = "Exam seat assignment";

std::string substitute(std::string_view text, const std::map<std::string, std::string, std::less<>>& values) {
  std::string out;
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto open = text.find("{{", pos);
    if (open == std::string_view::npos) break;
    auto close = text.find("}}", open + 2);
    if (close == std::string_view::npos) throw user_error("template", "unterminated placeholder");
    out.append(text.substr(pos, open - pos));
    auto name = text.substr(open + 2, close - open - 2);
    auto it = values.find(name);
    if (it == values.end()) throw user_error("template", "unknown placeholder {{" + std::string(name) + "}}");
    out += it->second;
    pos = close + 2;
  }
  out.append(text.substr(pos));
  return out;
}

}  // namespace

std::vector<Email> render_emails(const SeatingPlan& plan, const Roster& roster, std::string_view template_text,
                                 std::string_view exam_name) {
  std::string_view subject_tpl = kDefaultSubject;
  std::string_view body_tpl = template_text;
  if (template_text.starts_with("Subject:")) {
    auto nl = template_text.find('\n');
    subject_tpl = template_text.substr(8, nl == std::string_view::npos ? std::string_view::npos : nl - 8);
    while (!subject_tpl.empty() && (subject_tpl.front() == ' ')) subject_tpl.remove_prefix(1);
    while (!subject_tpl.empty() && (subject_tpl.back() == '\r' || subject_tpl.back() == ' ')) subject_tpl.remove_suffix(1);
    body_tpl = nl == std::string_view::npos ? std::string_view{} : template_text.substr(nl + 1);
  }

  std::string missing;
  for (const auto& [id, p] : plan.assignments) {
    if (!roster.find(id)) missing += (missing.empty() ? "" : ", ") + id;
  }
  if (!missing.empty()) throw user_error("roster", "students missing from roster: " + missing);

  // Validate placeholders even when the plan is empty.
  const std::map<std::string, std::string, std::less<>> probe{{"name", ""}, {"room", ""}, {"seat", ""}, {"exam", ""}};
  substitute(subject_tpl, probe);
  substitute(body_tpl, probe);

  std::vector<Email> batch;
  for (const auto& [id, p] : plan.assignments) {
    const auto* s = roster.find(id);
    const std::map<std::string, std::string, std::less<>> values{
        {"name", s->name}, {"room", p.room_id}, {"seat", seat_label(p.row, p.col)}, {"exam", std::string(exam_name)}};
    batch.push_back({s->email, substitute(subject_tpl, values), substitute(body_tpl, values)});
  }
  return batch;
}

std::string to_jsonl(const std::vector<Email>& batch) {
  std::string out;
  for (const auto& e : batch) {
    out += nlohmann::json{{"to", e.to}, {"subject", e.subject}, {"body", e.body}}.dump();
    out.push_back('\n');
  }
  return out;
}

}  // namespace courseforge::seating
