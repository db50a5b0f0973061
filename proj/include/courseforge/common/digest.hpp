#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace courseforge {

using Sha256Digest = std::array<std::uint8_t, 32>;

inline constexpr std::string_view kHashAlgorithm = "sha256";

Sha256Digest sha256(std::span<const std::uint8_t> bytes);
Sha256Digest sha256(std::string_view text);

// Incremental hashing for multi-part canonical forms.
class Sha256 {
 public:
  Sha256();
  ~Sha256();
  Sha256(const Sha256&) = delete;
  Sha256& operator=(const Sha256&) = delete;

  Sha256& update(std::span<const std::uint8_t> bytes);
  Sha256& update(std::string_view text);
  // Big-endian 64-bit length prefix; used to make concatenations unambiguous.
  Sha256& update_length(std::uint64_t n);
  Sha256Digest finish();

 private:
  void* ctx_;
};

std::string to_hex(std::span<const std::uint8_t> bytes);
// Throws courseforge::Error (user, "hex") on odd length or non-hex characters.
std::vector<std::uint8_t> from_hex(std::string_view hex);

std::vector<std::uint8_t> random_bytes(std::size_t n);

std::string base64_encode(std::span<const std::uint8_t> bytes);
std::string base64_encode(std::string_view bytes);
std::string base64_decode(std::string_view text);

}  // namespace courseforge
