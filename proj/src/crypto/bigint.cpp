#include "cbdc/crypto/bigint.hpp"

#include "cbdc/error.hpp"

namespace cbdc::crypto {

std::string to_hex(const BigInt& value) { return value.get_str(16); }

BigInt bigint_from_hex(std::string_view hex) {
  if (hex.empty()) fail(ErrorCode::InvalidArgument, "empty big-integer hex");
  for (char c : hex) {
    bool ok = (c >= '0' && c <= '9') || (c >= 'a' && c <= 'f');
    if (!ok) fail(ErrorCode::InvalidArgument, "big integers are lowercase hex");
  }
  return BigInt(std::string(hex), 16);
}

BigInt to_bigint(const Digest& digest) {
  BigInt out;
  mpz_import(out.get_mpz_t(), digest.bytes.size(), 1, 1, 1, 0, digest.bytes.data());
  return out;
}

std::size_t bit_length(const BigInt& value) {
  if (value == 0) return 0;
  return mpz_sizeinbase(value.get_mpz_t(), 2);
}

}  // namespace cbdc::crypto
