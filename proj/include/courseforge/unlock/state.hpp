#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace courseforge::unlock {

struct CaseProgress {
  bool unlocked = false;
  // Present iff unlocked.
  std::optional<std::vector<std::string>> unlocked_answer;
  std::int64_t attempt_count = 0;

  friend bool operator==(const CaseProgress&, const CaseProgress&) = default;
};

// Per-student unlock progress, keyed by testkit::case_key. There is no way
// to re-lock a case: progress only moves forward.
class UnlockState {
 public:
  UnlockState() = default;
  explicit UnlockState(std::string assignment_id) : assignment_id_(std::move(assignment_id)) {}

  const std::string& assignment_id() const { return assignment_id_; }

  bool is_unlocked(std::string_view key) const;
  const std::vector<std::string>* answer(std::string_view key) const;
  std::int64_t attempts(std::string_view key) const;
  const std::map<std::string, CaseProgress, std::less<>>& cases() const { return cases_; }

  void record_attempt(std::string_view key);
  void mark_unlocked(std::string_view key, std::vector<std::string> answer_lines);

  // Union of progress; keeps the larger attempt count.
  void merge(const UnlockState& other);

  nlohmann::json to_json() const;
  static UnlockState from_json(const nlohmann::json& j);

  friend bool operator==(const UnlockState&, const UnlockState&) = default;

 private:
  CaseProgress& entry(std::string_view key);

  std::string assignment_id_;
  std::map<std::string, CaseProgress, std::less<>> cases_;
};

// Exclusive advisory lock (flock) on the state file for the lifetime of the
// object. load() on an empty or new file returns an empty state.
class UnlockStateFile {
 public:
  explicit UnlockStateFile(const std::string& path);
  ~UnlockStateFile();
  UnlockStateFile(const UnlockStateFile&) = delete;
  UnlockStateFile& operator=(const UnlockStateFile&) = delete;

  UnlockState load(std::string_view assignment_id) const;
  // Merges with what is on disk, so a save never loses unlocked cases.
  void save(const UnlockState& state);

 private:
  std::string path_;
  int fd_ = -1;
};

}  // namespace courseforge::unlock
