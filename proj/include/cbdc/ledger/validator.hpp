#pragma once

#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "cbdc/ledger/entry.hpp"

namespace cbdc::ledger {

// A replica run by an independent payment service provider. It keeps its own
// view of spent nullifiers (fed by commit notices) and refuses to acknowledge
// a proposal that reuses one.
class Validator {
 public:
  Validator(std::string id, crypto::SigningKeyPair key);

  const std::string& id() const { return id_; }
  const crypto::PublicKey& public_key() const { return key_.public_part; }

  // One ack per entry, or nothing if any entry is malformed or conflicts.
  std::optional<std::vector<Ack>> acknowledge(std::span<const LedgerEntry> proposal) const;

  void apply_commit(std::span<const LedgerEntry> committed);

  std::size_t known_nullifiers() const { return spent_.size(); }

 private:
  std::string id_;
  crypto::SigningKeyPair key_;
  std::set<Nullifier> spent_;
};

}  // namespace cbdc::ledger
