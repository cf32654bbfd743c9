#include "cbdc/crypto/rsa.hpp"

#include "cbdc/error.hpp"

namespace cbdc::crypto {

namespace {

BigInt mod_pow(const BigInt& base, const BigInt& exp, const BigInt& mod) {
  BigInt out;
  mpz_powm(out.get_mpz_t(), base.get_mpz_t(), exp.get_mpz_t(), mod.get_mpz_t());
  return out;
}

// Returns false when no inverse exists.
bool mod_inverse(const BigInt& value, const BigInt& mod, BigInt& out) {
  return mpz_invert(out.get_mpz_t(), value.get_mpz_t(), mod.get_mpz_t()) != 0;
}

BigInt gcd(const BigInt& a, const BigInt& b) {
  BigInt out;
  mpz_gcd(out.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
  return out;
}

// A prime of exactly `bits` bits with the top two bits set, so that the
// product of two such primes has exactly 2*bits bits.
BigInt draw_prime(std::size_t bits, const BigInt& e, RngStream& rng) {
  for (;;) {
    BigInt candidate = rng.random_bits(bits);
    mpz_setbit(candidate.get_mpz_t(), bits - 1);
    mpz_setbit(candidate.get_mpz_t(), bits - 2);
    BigInt prime;
    mpz_nextprime(prime.get_mpz_t(), candidate.get_mpz_t());
    if (bit_length(prime) != bits) continue;
    if (gcd(prime - 1, e) != 1) continue;
    return prime;
  }
}

void hash_bigint(Sha256& h, const BigInt& value) {
  std::size_t count = 0;
  std::vector<std::uint8_t> buf((bit_length(value) + 7) / 8 + 1);
  mpz_export(buf.data(), &count, 1, 1, 1, 0, value.get_mpz_t());
  buf.resize(count);
  h.update_u64(count);
  h.update(std::span<const std::uint8_t>(buf));
}

}  // namespace

SigningKeyPair generate_keypair(unsigned bits, RngStream& rng) {
  if (bits != 512 && bits != 1024 && bits != 2048)
    fail(ErrorCode::UnsupportedBitSize, "unsupported key size: " + std::to_string(bits));
  const BigInt e = kPublicExponent;
  BigInt p = draw_prime(bits / 2, e, rng);
  BigInt q;
  do {
    q = draw_prime(bits / 2, e, rng);
  } while (q == p);
  SigningKeyPair key = keypair_from_primes(p, q, e);
  key.bits = bits;
  return key;
}

SigningKeyPair keypair_from_primes(const BigInt& p, const BigInt& q, const BigInt& e) {
  if (p == q || p < 2 || q < 2) fail(ErrorCode::InvalidArgument, "primes must be distinct");
  BigInt phi = (p - 1) * (q - 1);
  BigInt d;
  if (!mod_inverse(e, phi, d)) fail(ErrorCode::NotCoprime, "public exponent not invertible mod phi");
  SigningKeyPair key;
  key.public_part.modulus = p * q;
  key.public_part.exponent = e;
  key.secret_exponent = d;
  key.bits = static_cast<unsigned>(bit_length(key.public_part.modulus));
  return key;
}

Digest key_hash(const PublicKey& pk) {
  Sha256 h;
  hash_bigint(h, pk.modulus);
  hash_bigint(h, pk.exponent);
  return h.finish();
}

BlindingFactor draw_blinding_factor(const PublicKey& pk, RngStream& rng) {
  const BigInt& n = pk.modulus;
  if (n <= 3) fail(ErrorCode::OutOfRange, "modulus too small for blinding");
  for (;;) {
    std::uint64_t at = rng.draws();
    BigInt r = rng.uniform(BigInt(2), n - 1);
    if (gcd(r, n) == 1) return BlindingFactor{r, rng.id(), at};
  }
}

BigInt message_representative(const Digest& message, const PublicKey& pk) {
  BigInt m = to_bigint(message);
  mpz_mod(m.get_mpz_t(), m.get_mpz_t(), pk.modulus.get_mpz_t());
  return m;
}

BigInt blind(const BigInt& message, const BlindingFactor& r, const PublicKey& pk) {
  const BigInt& n = pk.modulus;
  if (r.value <= 0 || r.value >= n || gcd(r.value, n) != 1)
    fail(ErrorCode::NotCoprime, "blinding factor not coprime to modulus");
  BigInt m = message % n;
  if (m < 0) m += n;
  BigInt out = m * mod_pow(r.value, pk.exponent, n);
  mpz_mod(out.get_mpz_t(), out.get_mpz_t(), n.get_mpz_t());
  return out;
}

BigInt blind(const Digest& message, const BlindingFactor& r, const PublicKey& pk) {
  return blind(to_bigint(message), r, pk);
}

BigInt blind_sign(const BigInt& blinded, const SigningKeyPair& sk) {
  if (blinded <= 0 || blinded >= sk.public_part.modulus)
    fail(ErrorCode::OutOfRange, "blinded value outside (0, n)");
  return mod_pow(blinded, sk.secret_exponent, sk.public_part.modulus);
}

BigInt unblind(const BigInt& signature, const BlindingFactor& r, const PublicKey& pk) {
  const BigInt& n = pk.modulus;
  BigInt inv;
  if (r.value <= 0 || !mod_inverse(r.value, n, inv))
    fail(ErrorCode::NotCoprime, "blinding factor not invertible");
  BigInt out = signature * inv;
  mpz_mod(out.get_mpz_t(), out.get_mpz_t(), n.get_mpz_t());
  return out;
}

bool verify_blind_signature(const BigInt& message, const BigInt& signature, const PublicKey& pk) {
  const BigInt& n = pk.modulus;
  if (n <= 1 || signature < 0 || signature >= n) return false;
  BigInt m = message % n;
  if (m < 0) m += n;
  return mod_pow(signature, pk.exponent, n) == m;
}

bool verify_blind_signature(const Digest& message, const BigInt& signature, const PublicKey& pk) {
  return verify_blind_signature(to_bigint(message), signature, pk);
}

BigInt BlindSigner::sign(const BigInt& blinded) {
  BigInt signature = blind_sign(blinded, key_);
  transcript_.push_back({blinded, signature});
  return signature;
}

Signature sign(const Digest& message, const SigningKeyPair& key) {
  const BigInt m = message_representative(message, key.public_part);
  return Signature{mod_pow(m, key.secret_exponent, key.public_part.modulus)};
}

bool verify_signature(const Digest& message, const Signature& signature, const PublicKey& pk) {
  return verify_blind_signature(message, signature.value, pk);
}

}  // namespace cbdc::crypto
