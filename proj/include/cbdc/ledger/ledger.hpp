#pragma once

#include <deque>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "cbdc/error.hpp"
#include "cbdc/ledger/entry.hpp"
#include "cbdc/ledger/validator.hpp"

namespace cbdc::ledger {

using ProposalId = std::uint64_t;

struct LedgerConfig {
  std::size_t quorum = 2;
  Tick cooldown = 5;
  Tick quorum_timeout = 10;
};

// Effects the sequencer asks its host to carry out.
struct AckRequest {
  ProposalId proposal = 0;
  std::uint64_t round = 0;
  Tick deadline = 0;
  std::vector<LedgerEntry> entries;
};

struct CommitNotice {
  std::vector<LedgerEntry> entries;
};

struct SpendOutcome {
  ProposalId proposal = 0;
  std::optional<ErrorCode> error;
  std::vector<QuorumCertificate> certificates;  // one per request, in order
  std::vector<LedgerEntry> entries;
};

using LedgerEffect = std::variant<AckRequest, CommitNotice, SpendOutcome>;

struct NullifierStatus {
  bool spent = false;
  Tick tick = 0;

  bool operator==(const NullifierStatus&) const = default;
};

/// The permissioned spend registry's sequencer.
///
/// Owns the hash-chained log, the spent-nullifier set and the logical clock.
/// Spends are proposed as atomic batches, one batch in flight at a time; a
/// batch commits once `quorum` validators have acknowledged every entry, or
/// fails with QuorumTimeout at its deadline. Issue batches and redemptions are
/// appended directly and rebase any in-flight proposal onto the new head.
/// Network I/O is left to the host: call drain_effects() after every call.
class Ledger {
 public:
  Ledger(LedgerConfig config, asset::MintKeyDirectory mint_keys, ValidatorDirectory validators);

  const LedgerConfig& config() const { return config_; }
  const ValidatorDirectory& validators() const { return validators_; }
  const asset::MintKeyDirectory& mint_keys() const { return mint_keys_; }

  void register_bank(const std::string& bank_id);
  bool knows_bank(const std::string& bank_id) const { return banks_.count(bank_id) > 0; }

  Tick tick() { return ++clock_; }
  Tick current_tick() const { return clock_; }

  // Validates and reserves the batch's nullifiers, then queues it. Throws
  // InvalidAsset, AlreadySpent (spent, reserved or repeated in the batch) or
  // HotAsset; nothing is reserved on error.
  ProposalId submit_spend_batch(std::vector<SpendRequest> batch);

  void on_ack(ProposalId proposal, std::uint64_t round, const std::string& validator_id,
              const std::vector<Ack>& acks);
  void on_deadline(ProposalId proposal);

  std::vector<LedgerEffect> drain_effects();

  // Signed counts: negative counts void an earlier issuance.
  Digest register_issue_batch(const std::string& bank_id, const std::map<Amount, std::int64_t>& denomination_counts);

  // Each asset's latest transfer must be its only unrecorded one.
  std::vector<Digest> register_redemption(const std::string& bank_id, std::span<const asset::Asset> assets);

  NullifierStatus query_nullifier(const Nullifier& n) const;
  std::optional<LedgerEntry> find_entry(const Digest& entry_hash) const;
  Digest ledger_digest() const;
  const std::vector<LedgerEntry>& entries() const { return entries_; }
  bool has_active_proposal() const { return active_.has_value(); }
  std::size_t queued_proposals() const { return queue_.size(); }

  void save_jsonl(const std::filesystem::path& path) const;

 private:
  struct Proposal {
    ProposalId id = 0;
    std::vector<SpendRequest> requests;
    std::vector<LedgerEntry> entries;
    std::uint64_t round = 0;
    Tick deadline = 0;
    std::map<std::string, std::vector<Ack>> acks;
  };

  void check_spendable(const asset::Asset& asset, std::set<Nullifier>& batch) const;
  void build_entries(Proposal& p);
  void start_next();
  void rebase_active();
  void finish_active(std::optional<ErrorCode> error);
  LedgerEntry make_entry(EntryKind kind, std::optional<Nullifier> n, std::string recipient, Amount amount,
                         const Digest& prev) const;
  void append(LedgerEntry entry);

  LedgerConfig config_;
  asset::MintKeyDirectory mint_keys_;
  ValidatorDirectory validators_;
  std::set<std::string> banks_;
  Tick clock_ = 0;
  std::vector<LedgerEntry> entries_;
  std::map<Digest, std::size_t> by_hash_;
  std::map<Nullifier, Tick> spent_;
  std::set<Nullifier> reserved_;
  std::deque<Proposal> queue_;
  std::optional<Proposal> active_;
  ProposalId next_proposal_ = 1;
  std::vector<LedgerEffect> effects_;
};

// Runs a spend batch to completion against in-process validators. Validators
// for which `reachable` is false never answer. Throws QuorumTimeout when fewer
// than the quorum respond; the ledger must have nothing else in flight.
std::vector<QuorumCertificate> submit_spend(Ledger& ledger, std::vector<SpendRequest> batch,
                                            std::span<Validator> validators,
                                            const std::function<bool(const std::string&)>& reachable = {});

struct ReplayResult {
  bool ok = false;
  std::size_t entries = 0;
  Digest digest;
  std::string error;
};

// Recomputes every entry hash and prev link from genesis and checks
// nullifier uniqueness.
ReplayResult verify_chain(std::span<const LedgerEntry> entries);
ReplayResult replay_jsonl(const std::filesystem::path& path);

}  // namespace cbdc::ledger
