#include "courseforge/unlock/state.hpp"

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cstring>

#include "courseforge/common/error.hpp"

namespace courseforge::unlock {

using nlohmann::json;

bool UnlockState::is_unlocked(std::string_view key) const {
  auto it = cases_.find(key);
  return it != cases_.end() && it->second.unlocked;
}

const std::vector<std::string>* UnlockState::answer(std::string_view key) const {
  auto it = cases_.find(key);
  if (it == cases_.end() || !it->second.unlocked_answer) return nullptr;
  return &*it->second.unlocked_answer;
}

std::int64_t UnlockState::attempts(std::string_view key) const {
  auto it = cases_.find(key);
  return it == cases_.end() ? 0 : it->second.attempt_count;
}

CaseProgress& UnlockState::entry(std::string_view key) {
  auto it = cases_.find(key);
  if (it == cases_.end()) it = cases_.emplace(std::string(key), CaseProgress{}).first;
  return it->second;
}

void UnlockState::record_attempt(std::string_view key) { ++entry(key).attempt_count; }

void UnlockState::mark_unlocked(std::string_view key, std::vector<std::string> answer_lines) {
  CaseProgress& p = entry(key);
  if (p.unlocked) return;
  p.unlocked = true;
  p.unlocked_answer = std::move(answer_lines);
}

void UnlockState::merge(const UnlockState& other) {
  if (assignment_id_.empty()) assignment_id_ = other.assignment_id_;
  for (const auto& [key, theirs] : other.cases_) {
    CaseProgress& mine = entry(key);
    mine.attempt_count = std::max(mine.attempt_count, theirs.attempt_count);
    if (!mine.unlocked && theirs.unlocked) {
      mine.unlocked = true;
      mine.unlocked_answer = theirs.unlocked_answer;
    }
  }
}

json UnlockState::to_json() const {
  json cases = json::object();
  for (const auto& [key, p] : cases_) {
    json jp = {{"unlocked", p.unlocked}, {"attempt_count", p.attempt_count}};
    if (p.unlocked_answer) jp["unlocked_answer"] = *p.unlocked_answer;
    cases[key] = std::move(jp);
  }
  return {{"assignment_id", assignment_id_}, {"cases", std::move(cases)}};
}

UnlockState UnlockState::from_json(const json& j) {
  try {
    UnlockState s(j.at("assignment_id").get<std::string>());
    for (const auto& [key, jp] : j.at("cases").items()) {
      CaseProgress p;
      p.unlocked = jp.at("unlocked").get<bool>();
      p.attempt_count = jp.at("attempt_count").get<std::int64_t>();
      if (auto it = jp.find("unlocked_answer"); it != jp.end()) {
        p.unlocked_answer = it->get<std::vector<std::string>>();
      }
      if (p.unlocked != p.unlocked_answer.has_value() || p.attempt_count < 0) {
        throw user_error("unlock-state", "inconsistent progress for case '" + key + "'");
      }
      s.cases_.emplace(key, std::move(p));
    }
    return s;
  } catch (const json::exception& e) {
    throw user_error("unlock-state", std::string("malformed unlock state: ") + e.what());
  }
}

UnlockStateFile::UnlockStateFile(const std::string& path) : path_(path) {
  fd_ = ::open(path.c_str(), O_RDWR | O_CREAT | O_CLOEXEC, 0644);
  if (fd_ < 0) throw user_error("io", "cannot open unlock state '" + path + "': " + std::strerror(errno));
  if (::flock(fd_, LOCK_EX) != 0) {
    ::close(fd_);
    throw user_error("io", "cannot lock unlock state '" + path + "'");
  }
}

UnlockStateFile::~UnlockStateFile() {
  if (fd_ >= 0) {
    ::flock(fd_, LOCK_UN);
    ::close(fd_);
  }
}

UnlockState UnlockStateFile::load(std::string_view assignment_id) const {
  std::string text;
  char buf[4096];
  ::lseek(fd_, 0, SEEK_SET);
  for (ssize_t n; (n = ::read(fd_, buf, sizeof buf)) > 0;) text.append(buf, static_cast<std::size_t>(n));
  if (text.find_first_not_of(" \t\r\n") == std::string::npos) return UnlockState(std::string(assignment_id));
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error&) {
    throw user_error("unlock-state", "malformed unlock state file '" + path_ + "'");
  }
  UnlockState s = UnlockState::from_json(j);
  if (!assignment_id.empty() && s.assignment_id() != assignment_id) {
    throw user_error("unlock-state", "state file belongs to assignment '" + s.assignment_id() + "'");
  }
  return s;
}

void UnlockStateFile::save(const UnlockState& state) {
  UnlockState merged = state;
  merged.merge(load(""));
  std::string text = merged.to_json().dump(2) + "\n";
  if (::ftruncate(fd_, 0) != 0 || ::pwrite(fd_, text.data(), text.size(), 0) != static_cast<ssize_t>(text.size())) {
    throw user_error("io", "cannot write unlock state '" + path_ + "'");
  }
  ::fsync(fd_);
}

}  // namespace courseforge::unlock
