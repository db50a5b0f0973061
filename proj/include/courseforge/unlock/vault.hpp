#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "courseforge/common/digest.hpp"
#include "courseforge/testkit/spec.hpp"

namespace courseforge::unlock {

using Salt = std::array<std::uint8_t, 16>;

struct SealedAnswer {
  Salt salt{};
  Sha256Digest digest{};
};

// digest = SHA-256(salt || answer lines joined by '\n'). The lines must
// already be normalized.
SealedAnswer seal_answer(const std::vector<std::string>& answer_lines, const Salt& salt);

struct VaultEntry {
  std::string salt_hex;
  std::string digest_hex;
  std::optional<std::vector<std::string>> choices;
  bool case_insensitive = false;

  friend bool operator==(const VaultEntry&, const VaultEntry&) = default;
};

// Digests of locked answers, keyed by testkit::case_key. Holds nothing from
// which an answer can be read back.
struct UnlockVault {
  std::string assignment_id;
  std::string hash_alg = std::string(kHashAlgorithm);
  std::map<std::string, VaultEntry, std::less<>> entries;

  const VaultEntry& entry(std::string_view key) const;

  nlohmann::json to_json() const;
  static UnlockVault from_json(const nlohmann::json& j);
  static UnlockVault load(const std::string& path);
  void save(const std::string& path) const;

  friend bool operator==(const UnlockVault&, const UnlockVault&) = default;
};

using SaltSource = std::function<Salt()>;
Salt random_salt();

struct VaultBuild {
  testkit::TestSpec student_spec;
  UnlockVault vault;
};

// Seals every locked case and strips its expected_lines from the returned
// spec. Throws SpecError("validation") for a locked case without answers.
VaultBuild build_vault(const testkit::TestSpec& spec, const SaltSource& salts = random_salt);

// Normalizes the attempt (and lower-cases it for case-insensitive entries)
// before comparing digests. Throws for an unknown key.
bool verify_attempt(const UnlockVault& vault, std::string_view key,
                    const std::vector<std::string>& attempt_lines);
bool verify_attempt(const UnlockVault& vault, std::string_view key, std::string_view raw_attempt);

// Canonical form that gets sealed: normalized lines, ASCII-lowercased when
// the case is case-insensitive.
std::vector<std::string> canonical_answer(const std::vector<std::string>& lines, bool case_insensitive);

}  // namespace courseforge::unlock
