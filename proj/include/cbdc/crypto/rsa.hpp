#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cbdc/crypto/bigint.hpp"
#include "cbdc/crypto/digest.hpp"
#include "cbdc/crypto/rng.hpp"

namespace cbdc::crypto {

inline constexpr unsigned kToyBits = 512;
inline constexpr unsigned kRealisticBits = 2048;
inline constexpr unsigned long kPublicExponent = 65537;

struct PublicKey {
  BigInt modulus;
  BigInt exponent;

  bool operator==(const PublicKey&) const = default;
};

// RSA key pair. public and secret exponents are inverses modulo phi(n).
struct SigningKeyPair {
  PublicKey public_part;
  BigInt secret_exponent;
  unsigned bits = 0;

  bool operator==(const SigningKeyPair&) const = default;
};

// Supported sizes are 512, 1024 and 2048 bits; anything else throws
// UnsupportedBitSize. Same stream state gives the same key.
SigningKeyPair generate_keypair(unsigned bits, RngStream& rng);

// Builds a key from explicit primes; no profile size check (used for small
// worked examples such as p=61, q=53).
SigningKeyPair keypair_from_primes(const BigInt& p, const BigInt& q, const BigInt& e);

// Identity of a public key: H(len || n || len || e), big-endian bytes.
Digest key_hash(const PublicKey& pk);

struct BlindingFactor {
  BigInt value;
  std::string stream_id;
  std::uint64_t draw_index = 0;
};

// Draws r uniformly from [2, n-1] until gcd(r, n) = 1.
BlindingFactor draw_blinding_factor(const PublicKey& pk, RngStream& rng);

// Digest read big-endian and reduced mod n.
BigInt message_representative(const Digest& message, const PublicKey& pk);

// m * r^e mod n.
BigInt blind(const BigInt& message, const BlindingFactor& r, const PublicKey& pk);
BigInt blind(const Digest& message, const BlindingFactor& r, const PublicKey& pk);

// blinded^d mod n; throws OutOfRange unless 0 < blinded < n.
BigInt blind_sign(const BigInt& blinded, const SigningKeyPair& sk);

// sig * r^-1 mod n.
BigInt unblind(const BigInt& signature, const BlindingFactor& r, const PublicKey& pk);

// sig^e mod n == m mod n. Never throws.
bool verify_blind_signature(const BigInt& message, const BigInt& signature, const PublicKey& pk);
bool verify_blind_signature(const Digest& message, const BigInt& signature, const PublicKey& pk);

// Records everything a blind signer sees and returns.
struct TranscriptRow {
  BigInt blinded;
  BigInt signature;
};

class BlindSigner {
 public:
  explicit BlindSigner(SigningKeyPair key) : key_(std::move(key)) {}

  BigInt sign(const BigInt& blinded);

  const PublicKey& public_key() const { return key_.public_part; }
  const std::vector<TranscriptRow>& transcript() const { return transcript_; }

 private:
  SigningKeyPair key_;
  std::vector<TranscriptRow> transcript_;
};

// Deterministic hash-then-sign: (digest mod n)^d mod n.
struct Signature {
  BigInt value;

  bool operator==(const Signature&) const = default;
};

Signature sign(const Digest& message, const SigningKeyPair& key);
bool verify_signature(const Digest& message, const Signature& signature, const PublicKey& pk);

}  // namespace cbdc::crypto
