#pragma once

#include <array>
#include <cstdint>
#include <random>
#include <span>
#include <string>

#include "cbdc/crypto/bigint.hpp"

namespace cbdc::crypto {

/// A named, seeded random stream.
///
/// The engine seed is derived from SHA-256(master seed || name), so streams
/// with different names are independent and adding a stream never perturbs
/// the draws of another. Only raw engine output is used (no std
/// distributions), which keeps draws identical across standard libraries.
class RngStream {
 public:
  RngStream(std::uint64_t master_seed, std::string name);

  // Rebuilds a stream positioned after `draws` engine outputs.
  static RngStream restore(std::string name, std::uint64_t engine_seed, std::uint64_t draws);

  const std::string& id() const { return id_; }
  std::uint64_t engine_seed() const { return engine_seed_; }
  std::uint64_t draws() const { return draws_; }

  // Derives an independent stream without consuming draws from this one.
  RngStream child(const std::string& name) const;

  std::uint64_t next_u64();
  // Uniform in [lo, hi], inclusive.
  std::uint64_t uniform(std::uint64_t lo, std::uint64_t hi);
  // Uniform in [0, 1).
  double unit();
  bool bernoulli(double p) { return p > 0.0 && unit() < p; }

  void fill(std::span<std::uint8_t> out);
  std::array<std::uint8_t, 32> bytes32();

  // Uniform integer with exactly `bits` random bits (may have leading zeros).
  BigInt random_bits(std::size_t bits);
  // Uniform in [lo, hi], inclusive, by rejection.
  BigInt uniform(const BigInt& lo, const BigInt& hi);

 private:
  RngStream(std::string id, std::uint64_t engine_seed);

  std::string id_;
  std::uint64_t engine_seed_;
  std::uint64_t draws_ = 0;
  std::mt19937_64 engine_;
};

std::uint64_t derive_seed(std::uint64_t master_seed, const std::string& name);

}  // namespace cbdc::crypto
