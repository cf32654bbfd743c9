#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cbdc/asset/asset.hpp"
#include "cbdc/asset/codec.hpp"

namespace cbdc::ledger {

using asset::Nullifier;
using crypto::Digest;

enum class EntryKind { IssueBatch, Spend, Redemption };

std::string_view entry_kind_name(EntryKind kind);
EntryKind entry_kind_from_name(std::string_view name);

// There is deliberately no payer field: a Spend names only its recipient.
struct LedgerEntry {
  EntryKind kind = EntryKind::IssueBatch;
  std::optional<Nullifier> nullifier;
  std::string recipient_id;
  Amount amount = 0;
  Tick tick = 0;
  Digest prev_hash;
  Digest entry_hash;

  bool operator==(const LedgerEntry&) const = default;
};

// H(canonical JSON of every field except entry_hash).
Digest compute_entry_hash(const LedgerEntry& entry);

// Canonical encoding, entry_hash last.
Json entry_to_json(const LedgerEntry& entry);
LedgerEntry entry_from_json(const Json& j);

struct Ack {
  std::string validator_id;
  crypto::Signature signature;

  bool operator==(const Ack&) const = default;
};

struct QuorumCertificate {
  Digest entry_hash;
  std::vector<Ack> acks;

  bool operator==(const QuorumCertificate&) const = default;
};

Json certificate_to_json(const QuorumCertificate& qc);
QuorumCertificate certificate_from_json(const Json& j);

using ValidatorDirectory = std::map<std::string, crypto::PublicKey>;

// At least `quorum` distinct known validators with valid signatures.
bool verify_certificate(const QuorumCertificate& qc, const ValidatorDirectory& validators, std::size_t quorum);

// The asset carries its final transfer to the merchant.
struct SpendRequest {
  asset::Asset asset;
  asset::InvoiceRef invoice_ref;
};

Json spend_request_to_json(const SpendRequest& req);

}  // namespace cbdc::ledger
