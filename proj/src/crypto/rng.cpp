#include "cbdc/crypto/rng.hpp"

#include "cbdc/error.hpp"

namespace cbdc::crypto {

std::uint64_t derive_seed(std::uint64_t master_seed, const std::string& name) {
  Digest d = Sha256().update_u64(master_seed).update(name).finish();
  std::uint64_t out = 0;
  for (int i = 0; i < 8; ++i) out = (out << 8) | d.bytes[i];
  return out;
}

RngStream::RngStream(std::string id, std::uint64_t engine_seed)
    : id_(std::move(id)), engine_seed_(engine_seed), engine_(engine_seed) {}

RngStream::RngStream(std::uint64_t master_seed, std::string name)
    : RngStream(name, derive_seed(master_seed, name)) {}

RngStream RngStream::restore(std::string name, std::uint64_t engine_seed, std::uint64_t draws) {
  RngStream s(std::move(name), engine_seed);
  s.engine_.discard(draws);
  s.draws_ = draws;
  return s;
}

RngStream RngStream::child(const std::string& name) const {
  std::string child_id = id_ + "/" + name;
  return RngStream(child_id, derive_seed(engine_seed_, child_id));
}

std::uint64_t RngStream::next_u64() {
  ++draws_;
  return engine_();
}

std::uint64_t RngStream::uniform(std::uint64_t lo, std::uint64_t hi) {
  if (lo > hi) fail(ErrorCode::InvalidArgument, "uniform: empty range");
  std::uint64_t span = hi - lo;
  if (span == UINT64_MAX) return next_u64();
  std::uint64_t range = span + 1;
  std::uint64_t limit = UINT64_MAX - (UINT64_MAX % range);
  std::uint64_t x;
  do {
    x = next_u64();
  } while (x >= limit);
  return lo + x % range;
}

double RngStream::unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

void RngStream::fill(std::span<std::uint8_t> out) {
  std::size_t i = 0;
  while (i < out.size()) {
    std::uint64_t x = next_u64();
    for (int b = 0; b < 8 && i < out.size(); ++b, ++i) {
      out[i] = static_cast<std::uint8_t>(x >> 56);
      x <<= 8;
    }
  }
}

std::array<std::uint8_t, 32> RngStream::bytes32() {
  std::array<std::uint8_t, 32> out{};
  fill(out);
  return out;
}

BigInt RngStream::random_bits(std::size_t bits) {
  BigInt out = 0;
  std::size_t words = (bits + 63) / 64;
  for (std::size_t i = 0; i < words; ++i) {
    std::uint64_t w = next_u64();
    out <<= 32;
    out += static_cast<unsigned long>(w >> 32);
    out <<= 32;
    out += static_cast<unsigned long>(w & 0xffffffffULL);
  }
  std::size_t excess = words * 64 - bits;
  if (excess > 0) out >>= static_cast<mp_bitcnt_t>(excess);
  return out;
}

BigInt RngStream::uniform(const BigInt& lo, const BigInt& hi) {
  if (lo > hi) fail(ErrorCode::InvalidArgument, "uniform: empty range");
  BigInt span = hi - lo;
  std::size_t bits = span == 0 ? 1 : bit_length(span);
  BigInt x;
  do {
    x = random_bits(bits);
  } while (x > span);
  return lo + x;
}

}  // namespace cbdc::crypto
