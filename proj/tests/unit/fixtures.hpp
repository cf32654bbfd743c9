#pragma once

#include <map>
#include <utility>

#include "cbdc/asset/asset.hpp"
#include "cbdc/error.hpp"

namespace cbdc::testing {

// Issues assets straight from per-denomination keys, skipping the bank round
// trip. Good enough for modules that only consume finished assets.
struct MintFixture {
  crypto::RngStream rng;
  std::map<Amount, crypto::SigningKeyPair> keys;
  asset::MintKeyDirectory directory;

  explicit MintFixture(std::uint64_t seed = 99) : rng(seed, "fixture") {
    for (Amount d : kDefaultDenominations) {
      keys[d] = crypto::generate_keypair(512, rng);
      directory[d] = keys[d].public_part;
    }
  }

  std::pair<asset::Asset, crypto::SigningKeyPair> issue(Amount denom, Tick tick = 0) {
    crypto::SigningKeyPair owner = crypto::generate_keypair(512, rng);
    asset::Asset a;
    a.serial = rng.bytes32();
    a.denomination = denom;
    a.genesis_owner_hash = crypto::key_hash(owner.public_part);
    auto commitment = asset::genesis_commitment(a.serial, a.genesis_owner_hash);
    a.genesis_signature =
        crypto::blind_sign(crypto::message_representative(commitment, directory[denom]), keys[denom]);
    a.issue_tick = tick;
    return {a, owner};
  }
};

template <typename Fn>
ErrorCode error_of(Fn&& fn) {
  try {
    fn();
  } catch (const ProtocolError& e) {
    return e.code();
  }
  throw std::logic_error("expected a ProtocolError");
}

}  // namespace cbdc::testing
