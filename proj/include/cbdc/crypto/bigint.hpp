#pragma once

#include <gmpxx.h>

#include <string>
#include <string_view>

#include "cbdc/crypto/digest.hpp"

namespace cbdc::crypto {

using BigInt = mpz_class;

// Lowercase hex, no prefix, no leading zeros ("0" for zero).
std::string to_hex(const BigInt& value);
BigInt bigint_from_hex(std::string_view hex);

// Big-endian interpretation of the digest bytes.
BigInt to_bigint(const Digest& digest);

std::size_t bit_length(const BigInt& value);

}  // namespace cbdc::crypto
