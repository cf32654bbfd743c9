#include "cbdc/crypto/digest.hpp"

#include <openssl/evp.h>

#include "cbdc/error.hpp"

namespace cbdc::crypto {

namespace {

int nibble(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

}  // namespace

std::string to_hex(std::span<const std::uint8_t> bytes) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out;
  out.reserve(bytes.size() * 2);
  for (auto b : bytes) {
    out.push_back(kDigits[b >> 4]);
    out.push_back(kDigits[b & 0x0f]);
  }
  return out;
}

std::vector<std::uint8_t> from_hex(std::string_view hex) {
  if (hex.size() % 2 != 0) fail(ErrorCode::InvalidArgument, "odd-length hex string");
  std::vector<std::uint8_t> out(hex.size() / 2);
  for (std::size_t i = 0; i < out.size(); ++i) {
    int hi = nibble(hex[2 * i]);
    int lo = nibble(hex[2 * i + 1]);
    if (hi < 0 || lo < 0) fail(ErrorCode::InvalidArgument, "invalid hex digit");
    out[i] = static_cast<std::uint8_t>((hi << 4) | lo);
  }
  return out;
}

std::string Digest::hex() const { return to_hex(bytes); }

Digest Digest::from_hex(std::string_view hex) {
  if (hex.size() != 64) fail(ErrorCode::InvalidArgument, "digest must be 64 hex characters");
  auto raw = crypto::from_hex(hex);
  Digest d;
  std::copy(raw.begin(), raw.end(), d.bytes.begin());
  return d;
}

bool Digest::is_zero() const {
  for (auto b : bytes)
    if (b != 0) return false;
  return true;
}

Sha256::Sha256() : ctx_(EVP_MD_CTX_new()) {
  if (ctx_ == nullptr || EVP_DigestInit_ex(static_cast<EVP_MD_CTX*>(ctx_), EVP_sha256(), nullptr) != 1)
    throw std::runtime_error("SHA-256 initialisation failed");
}

Sha256::~Sha256() { EVP_MD_CTX_free(static_cast<EVP_MD_CTX*>(ctx_)); }

Sha256& Sha256::update(std::span<const std::uint8_t> data) {
  EVP_DigestUpdate(static_cast<EVP_MD_CTX*>(ctx_), data.data(), data.size());
  return *this;
}

Sha256& Sha256::update(std::string_view text) {
  EVP_DigestUpdate(static_cast<EVP_MD_CTX*>(ctx_), text.data(), text.size());
  return *this;
}

Sha256& Sha256::update_u64(std::uint64_t value) {
  std::array<std::uint8_t, 8> be{};
  for (int i = 7; i >= 0; --i) {
    be[i] = static_cast<std::uint8_t>(value & 0xff);
    value >>= 8;
  }
  return update(std::span<const std::uint8_t>(be));
}

Digest Sha256::finish() {
  Digest d;
  unsigned int len = 0;
  EVP_DigestFinal_ex(static_cast<EVP_MD_CTX*>(ctx_), d.bytes.data(), &len);
  EVP_DigestInit_ex(static_cast<EVP_MD_CTX*>(ctx_), EVP_sha256(), nullptr);
  return d;
}

Digest sha256(std::span<const std::uint8_t> data) { return Sha256().update(data).finish(); }

Digest sha256(std::string_view text) { return Sha256().update(text).finish(); }

}  // namespace cbdc::crypto
