#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>

namespace fisheyegt {

using Digest = std::array<std::uint8_t, 32>;

/// SHA-256 of a byte sequence.
Digest sha256(std::span<const std::byte> bytes);
Digest sha256(std::string_view text);

/// Incremental SHA-256.
class Sha256 {
 public:
  Sha256();
  ~Sha256();
  Sha256(const Sha256&) = delete;
  Sha256& operator=(const Sha256&) = delete;

  void update(std::span<const std::byte> bytes);
  void update(std::string_view text);
  Digest finish();

 private:
  void* ctx_;
};

std::string to_hex(const Digest& digest);
/// Throws FormatError for anything but 64 hex digits.
Digest digest_from_hex(std::string_view hex);

}  // namespace fisheyegt
