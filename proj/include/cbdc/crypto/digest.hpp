#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace cbdc::crypto {

struct Digest {
  std::array<std::uint8_t, 32> bytes{};

  std::string hex() const;
  static Digest from_hex(std::string_view hex);
  static Digest zero() { return {}; }
  bool is_zero() const;

  auto operator<=>(const Digest&) const = default;
};

std::string to_hex(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> from_hex(std::string_view hex);

// Incremental SHA-256. Multi-byte integers are fed big-endian.
class Sha256 {
 public:
  Sha256();
  ~Sha256();
  Sha256(const Sha256&) = delete;
  Sha256& operator=(const Sha256&) = delete;

  Sha256& update(std::span<const std::uint8_t> data);
  Sha256& update(std::string_view text);
  Sha256& update(const Digest& digest) { return update(std::span<const std::uint8_t>(digest.bytes)); }
  Sha256& update_u64(std::uint64_t value);
  Digest finish();

 private:
  void* ctx_;
};

Digest sha256(std::span<const std::uint8_t> data);
Digest sha256(std::string_view text);

}  // namespace cbdc::crypto
