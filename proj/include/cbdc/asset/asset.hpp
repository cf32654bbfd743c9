#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cbdc/crypto/rsa.hpp"
#include "cbdc/types.hpp"

namespace cbdc::asset {

using crypto::Digest;
using crypto::PublicKey;
using Serial = std::array<std::uint8_t, 32>;

struct InvoiceRef {
  std::string merchant_id;
  std::string invoice_id;

  bool operator==(const InvoiceRef&) const = default;
};

// One link of the asset's history. `signature` is made by the key whose hash
// the previous link (or the genesis owner hash) names.
struct TransferRecord {
  std::uint64_t index = 0;
  PublicKey from_public_key;
  Digest to_key_hash;
  std::optional<InvoiceRef> invoice_ref;
  crypto::Signature signature;

  bool operator==(const TransferRecord&) const = default;
};

// A self-verifying token. Legitimacy follows from the mint signature over the
// genesis commitment plus the signed chain of transfers; no issuer lookup.
struct Asset {
  Serial serial{};
  Amount denomination = 0;
  Digest genesis_owner_hash;
  crypto::BigInt genesis_signature;
  std::vector<TransferRecord> history;
  Tick issue_tick = 0;

  // Hash of the key that currently controls the asset.
  const Digest& owner_hash() const {
    return history.empty() ? genesis_owner_hash : history.back().to_key_hash;
  }
  std::string serial_hex() const;

  bool operator==(const Asset&) const = default;
};

using MintKeyDirectory = std::map<Amount, PublicKey>;

// H(serial || owner_key_hash). Throws MalformedSerial unless serial is 32 bytes.
Digest genesis_commitment(std::span<const std::uint8_t> serial, const Digest& owner_key_hash);

// Message signed by the current owner when extending the history.
Digest transfer_message(const Serial& serial, std::uint64_t index, const Digest& to_key_hash,
                        const std::optional<InvoiceRef>& invoice_ref);

// Returns a copy with one new record appended; the input is not modified.
// Throws WrongOwnerKey when owner_key does not control the asset and
// UnverifiableAsset when the existing history does not check out.
Asset append_transfer(const Asset& asset, const Digest& to_key_hash,
                      const std::optional<InvoiceRef>& invoice_ref,
                      const crypto::SigningKeyPair& owner_key);

enum class Check { GenesisSignature, IndexGap, ChainLinkage, RecordSignature };

std::string_view check_name(Check check);

struct VerificationReport {
  bool valid = true;
  std::optional<Check> first_failure;
  std::string detail;
};

// Uses only the asset's own contents and the mint public keys.
VerificationReport verify_asset(const Asset& asset, const MintKeyDirectory& mint_keys);

// History-only checks (everything except the genesis signature).
VerificationReport verify_history(const Asset& asset);

struct Nullifier {
  Digest value;

  auto operator<=>(const Nullifier&) const = default;
};

// H(serial || index), index as 8-byte big-endian.
Nullifier nullifier(const Serial& serial, std::uint64_t index);

// Nullifier of the asset's latest transfer. Requires a non-empty history.
Nullifier latest_nullifier(const Asset& asset);

}  // namespace cbdc::asset
