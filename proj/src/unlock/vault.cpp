#include "courseforge/unlock/vault.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "courseforge/common/error.hpp"
#include "courseforge/testkit/normalize.hpp"

namespace courseforge::unlock {

using nlohmann::json;

SealedAnswer seal_answer(const std::vector<std::string>& answer_lines, const Salt& salt) {
  SealedAnswer sealed;
  sealed.salt = salt;
  sealed.digest = Sha256().update(salt).update(testkit::join_lines(answer_lines)).finish();
  return sealed;
}

Salt random_salt() {
  auto bytes = random_bytes(Salt{}.size());
  Salt salt{};
  std::copy(bytes.begin(), bytes.end(), salt.begin());
  return salt;
}

std::vector<std::string> canonical_answer(const std::vector<std::string>& lines, bool case_insensitive) {
  auto out = testkit::normalize_output(testkit::join_lines(lines));
  if (case_insensitive) {
    for (auto& line : out) {
      std::transform(line.begin(), line.end(), line.begin(), [](unsigned char c) {
        return static_cast<char>(c >= 'A' && c <= 'Z' ? c - 'A' + 'a' : c);
      });
    }
  }
  return out;
}

const VaultEntry& UnlockVault::entry(std::string_view key) const {
  auto it = entries.find(key);
  if (it == entries.end()) throw user_error("vault", "no vault entry for case '" + std::string(key) + "'");
  return it->second;
}

json UnlockVault::to_json() const {
  json jentries = json::object();
  for (const auto& [key, e] : entries) {
    json je = {{"salt", e.salt_hex}, {"digest", e.digest_hex}};
    if (e.choices) je["choices"] = *e.choices;
    if (e.case_insensitive) je["case_insensitive"] = true;
    jentries[key] = std::move(je);
  }
  return {{"assignment_id", assignment_id}, {"hash_alg", hash_alg}, {"entries", std::move(jentries)}};
}

UnlockVault UnlockVault::from_json(const json& j) {
  try {
    UnlockVault v;
    v.assignment_id = j.at("assignment_id").get<std::string>();
    v.hash_alg = j.at("hash_alg").get<std::string>();
    if (v.hash_alg != kHashAlgorithm) {
      throw user_error("vault", "unsupported hash_alg '" + v.hash_alg + "'");
    }
    for (const auto& [key, je] : j.at("entries").items()) {
      VaultEntry e;
      e.salt_hex = je.at("salt").get<std::string>();
      e.digest_hex = je.at("digest").get<std::string>();
      if (from_hex(e.salt_hex).size() != Salt{}.size() || from_hex(e.digest_hex).size() != 32) {
        throw user_error("vault", "bad salt or digest length for '" + key + "'");
      }
      if (auto it = je.find("choices"); it != je.end()) e.choices = it->get<std::vector<std::string>>();
      if (auto it = je.find("case_insensitive"); it != je.end()) e.case_insensitive = it->get<bool>();
      v.entries.emplace(key, std::move(e));
    }
    return v;
  } catch (const json::exception& e) {
    throw user_error("vault", std::string("malformed vault: ") + e.what());
  }
}

UnlockVault UnlockVault::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw user_error("io", "cannot read vault '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return from_json(json::parse(buf.str()));
  } catch (const json::parse_error&) {
    throw user_error("vault", "malformed vault file '" + path + "'");
  }
}

void UnlockVault::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw user_error("io", "cannot write vault '" + path + "'");
  out << to_json().dump(2) << "\n";
}

VaultBuild build_vault(const testkit::TestSpec& spec, const SaltSource& salts) {
  testkit::validate(spec);
  VaultBuild build{spec, UnlockVault{}};
  build.vault.assignment_id = spec.assignment_id;
  for (auto& q : build.student_spec.questions) {
    for (auto& c : q.cases) {
      if (!c.locked) continue;
      if (!c.expected_lines) {
        throw testkit::SpecError("validation", 0, q.id + "/" + c.id,
                                 "locked case has no expected_lines to seal");
      }
      Salt salt = salts();
      auto sealed = seal_answer(canonical_answer(*c.expected_lines, c.case_insensitive), salt);
      VaultEntry e;
      e.salt_hex = to_hex(sealed.salt);
      e.digest_hex = to_hex(sealed.digest);
      e.choices = c.choices;
      e.case_insensitive = c.case_insensitive;
      build.vault.entries.emplace(testkit::case_key(q.id, c.id), std::move(e));
      c.expected_lines.reset();
    }
  }
  return build;
}

bool verify_attempt(const UnlockVault& vault, std::string_view key,
                    const std::vector<std::string>& attempt_lines) {
  const VaultEntry& e = vault.entry(key);
  auto salt_bytes = from_hex(e.salt_hex);
  Salt salt{};
  std::copy(salt_bytes.begin(), salt_bytes.end(), salt.begin());
  auto sealed = seal_answer(canonical_answer(attempt_lines, e.case_insensitive), salt);
  return to_hex(sealed.digest) == e.digest_hex;
}

bool verify_attempt(const UnlockVault& vault, std::string_view key, std::string_view raw_attempt) {
  return verify_attempt(vault, key, testkit::normalize_output(raw_attempt));
}

}  // namespace courseforge::unlock
