#include "courseforge/testkit/spec.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

namespace courseforge::testkit {

using nlohmann::json;

namespace {

std::string describe(std::size_t line, const std::string& field, const std::string& message) {
  std::string out;
  if (line > 0) out += "line " + std::to_string(line) + ": ";
  if (!field.empty()) out += field + ": ";
  return out + message;
}

[[noreturn]] void fail_field(const std::string& field, const std::string& message) {
  throw SpecError("parse", 0, field, message);
}

[[noreturn]] void fail_validation(const std::string& field, const std::string& message) {
  throw SpecError("validation", 0, field, message);
}

void reject_unknown_keys(const json& obj, const std::string& path,
                         std::initializer_list<std::string_view> allowed) {
  for (const auto& [key, value] : obj.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      fail_field(path + "." + key, "unknown field");
    }
  }
}

const json& require(const json& obj, const std::string& path, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end()) fail_field(path + "." + key, "missing required field");
  return *it;
}

std::string as_string(const json& v, const std::string& field) {
  if (!v.is_string()) fail_field(field, "expected a string");
  return v.get<std::string>();
}

std::vector<std::string> as_string_list(const json& v, const std::string& field) {
  if (!v.is_array()) fail_field(field, "expected an array of strings");
  std::vector<std::string> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    out.push_back(as_string(v[i], field + "[" + std::to_string(i) + "]"));
  }
  return out;
}

bool as_bool(const json& v, const std::string& field) {
  if (!v.is_boolean()) fail_field(field, "expected a boolean");
  return v.get<bool>();
}

TestCase parse_case(const json& j, const std::string& path) {
  if (!j.is_object()) fail_field(path, "expected an object");
  reject_unknown_keys(j, path, {"id", "prompt", "stdin", "expected_lines", "locked", "choices",
                                "timeout_ms", "case_insensitive"});
  TestCase c;
  c.id = as_string(require(j, path, "id"), path + ".id");
  if (auto it = j.find("prompt"); it != j.end()) c.prompt = as_string(*it, path + ".prompt");
  if (auto it = j.find("stdin"); it != j.end()) c.stdin_text = as_string(*it, path + ".stdin");
  if (auto it = j.find("expected_lines"); it != j.end()) {
    c.expected_lines = as_string_list(*it, path + ".expected_lines");
  }
  if (auto it = j.find("locked"); it != j.end()) c.locked = as_bool(*it, path + ".locked");
  if (auto it = j.find("choices"); it != j.end()) c.choices = as_string_list(*it, path + ".choices");
  if (auto it = j.find("timeout_ms"); it != j.end()) {
    if (!it->is_number_integer()) fail_field(path + ".timeout_ms", "expected an integer");
    c.timeout_ms = it->get<std::int64_t>();
  }
  if (auto it = j.find("case_insensitive"); it != j.end()) {
    c.case_insensitive = as_bool(*it, path + ".case_insensitive");
  }
  return c;
}

std::vector<TestCase> parse_cases(const json& obj, const std::string& path, const char* key,
                                  bool required) {
  auto it = obj.find(key);
  if (it == obj.end()) {
    if (required) fail_field(path + "." + key, "missing required field");
    return {};
  }
  if (!it->is_array()) fail_field(path + "." + key, "expected an array");
  std::vector<TestCase> out;
  for (std::size_t i = 0; i < it->size(); ++i) {
    out.push_back(parse_case((*it)[i], path + "." + key + "[" + std::to_string(i) + "]"));
  }
  return out;
}

Question parse_question(const json& j, const std::string& path) {
  if (!j.is_object()) fail_field(path, "expected an object");
  reject_unknown_keys(j, path, {"id", "points", "cases", "gated_cases"});
  Question q;
  q.id = as_string(require(j, path, "id"), path + ".id");
  const json& points = require(j, path, "points");
  if (!points.is_number()) fail_field(path + ".points", "expected a number");
  q.points = points.get<double>();
  q.cases = parse_cases(j, path, "cases", true);
  q.gated_cases = parse_cases(j, path, "gated_cases", false);
  return q;
}

bool valid_id(std::string_view id) {
  return !id.empty() && std::all_of(id.begin(), id.end(), [](char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
           c == '_' || c == '-' || c == '.';
  });
}

json case_to_json(const TestCase& c, Audience audience) {
  json j;
  j["id"] = c.id;
  j["prompt"] = c.prompt;
  j["stdin"] = c.stdin_text;
  bool reveal = !c.locked || audience == Audience::kInstructor;
  if (c.expected_lines && reveal) j["expected_lines"] = *c.expected_lines;
  j["locked"] = c.locked;
  if (c.choices) j["choices"] = *c.choices;
  j["timeout_ms"] = c.timeout_ms;
  if (c.case_insensitive) j["case_insensitive"] = true;
  return j;
}

}  // namespace

SpecError::SpecError(std::string kind, std::size_t line, std::string field,
                     const std::string& message)
    : Error(ErrorCategory::kUser, std::move(kind), describe(line, field, message)),
      line_(line),
      field_(std::move(field)) {}

const Question* TestSpec::find_question(std::string_view id) const {
  for (const auto& q : questions) {
    if (q.id == id) return &q;
  }
  return nullptr;
}

std::string case_key(std::string_view question_id, std::string_view case_id) {
  std::string key(question_id);
  key.push_back('/');
  key.append(case_id);
  return key;
}

void validate(const TestSpec& spec) {
  if (!valid_id(spec.assignment_id)) {
    fail_validation("assignment_id", "ids must be non-empty [A-Za-z0-9_.-]");
  }
  std::set<std::string> question_ids;
  for (std::size_t qi = 0; qi < spec.questions.size(); ++qi) {
    const Question& q = spec.questions[qi];
    std::string qpath = "questions[" + std::to_string(qi) + "]";
    if (!valid_id(q.id)) fail_validation(qpath + ".id", "ids must be non-empty [A-Za-z0-9_.-]");
    if (!question_ids.insert(q.id).second) {
      fail_validation(qpath + ".id", "duplicate question id '" + q.id + "'");
    }
    if (!(q.points >= 0)) fail_validation(qpath + ".points", "points must be >= 0");

    std::set<std::string> case_ids;
    auto check = [&](const TestCase& c, const std::string& cpath, bool gated) {
      if (!valid_id(c.id)) fail_validation(cpath + ".id", "ids must be non-empty [A-Za-z0-9_.-]");
      if (!case_ids.insert(c.id).second) {
        fail_validation(cpath + ".id", "duplicate case id '" + c.id + "' in question '" + q.id + "'");
      }
      if (c.timeout_ms <= 0) fail_validation(cpath + ".timeout_ms", "timeout_ms must be > 0");
      if (gated && c.locked) fail_validation(cpath + ".locked", "gated cases cannot be locked");
      if (!c.locked && !c.expected_lines) {
        fail_validation(cpath + ".expected_lines", "unlocked case '" + c.id + "' has no expected_lines");
      }
      if (c.choices && c.choices->empty()) fail_validation(cpath + ".choices", "choices must be non-empty");
    };
    for (std::size_t ci = 0; ci < q.cases.size(); ++ci) {
      check(q.cases[ci], qpath + ".cases[" + std::to_string(ci) + "]", false);
    }
    for (std::size_t ci = 0; ci < q.gated_cases.size(); ++ci) {
      check(q.gated_cases[ci], qpath + ".gated_cases[" + std::to_string(ci) + "]", true);
    }
  }
}

TestSpec parse_spec(std::string_view document) {
  json root;
  try {
    root = json::parse(document);
  } catch (const json::parse_error& e) {
    std::size_t offset = std::min<std::size_t>(e.byte, document.size());
    std::size_t line = 1 + static_cast<std::size_t>(
                               std::count(document.begin(), document.begin() + static_cast<long>(offset), '\n'));
    throw SpecError("parse", line, "", "malformed JSON");
  }
  if (!root.is_object()) fail_field("$", "expected a JSON object");
  reject_unknown_keys(root, "$", {"assignment_id", "version", "questions"});

  TestSpec spec;
  spec.assignment_id = as_string(require(root, "$", "assignment_id"), "assignment_id");
  if (auto it = root.find("version"); it != root.end()) spec.version = as_string(*it, "version");
  const json& qs = require(root, "$", "questions");
  if (!qs.is_array()) fail_field("questions", "expected an array");
  for (std::size_t i = 0; i < qs.size(); ++i) {
    spec.questions.push_back(parse_question(qs[i], "questions[" + std::to_string(i) + "]"));
  }
  validate(spec);
  return spec;
}

TestSpec load_spec(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw user_error("io", "cannot read spec file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_spec(buf.str());
}

json to_json(const TestSpec& spec, Audience audience) {
  json j;
  j["assignment_id"] = spec.assignment_id;
  j["version"] = spec.version;
  j["questions"] = json::array();
  for (const auto& q : spec.questions) {
    json jq;
    jq["id"] = q.id;
    jq["points"] = q.points;
    jq["cases"] = json::array();
    for (const auto& c : q.cases) jq["cases"].push_back(case_to_json(c, audience));
    jq["gated_cases"] = json::array();
    for (const auto& c : q.gated_cases) jq["gated_cases"].push_back(case_to_json(c, audience));
    j["questions"].push_back(std::move(jq));
  }
  return j;
}

std::string serialize_spec(const TestSpec& spec, Audience audience) {
  return to_json(spec, audience).dump(2) + "\n";
}

}  // namespace courseforge::testkit
