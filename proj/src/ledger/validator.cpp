#include "cbdc/ledger/validator.hpp"

namespace cbdc::ledger {

Validator::Validator(std::string id, crypto::SigningKeyPair key) : id_(std::move(id)), key_(std::move(key)) {}

std::optional<std::vector<Ack>> Validator::acknowledge(std::span<const LedgerEntry> proposal) const {
  std::set<Nullifier> batch;
  std::vector<Ack> acks;
  for (std::size_t i = 0; i < proposal.size(); ++i) {
    const LedgerEntry& e = proposal[i];
    if (compute_entry_hash(e) != e.entry_hash) return std::nullopt;
    if (i > 0 && e.prev_hash != proposal[i - 1].entry_hash) return std::nullopt;
    if (e.kind == EntryKind::Spend) {
      if (!e.nullifier || e.recipient_id.empty()) return std::nullopt;
      if (spent_.count(*e.nullifier) || !batch.insert(*e.nullifier).second) return std::nullopt;
    }
    acks.push_back(Ack{id_, crypto::sign(e.entry_hash, key_)});
  }
  return acks;
}

void Validator::apply_commit(std::span<const LedgerEntry> committed) {
  for (const auto& e : committed)
    if (e.nullifier) spent_.insert(*e.nullifier);
}

}  // namespace cbdc::ledger
