#include "cbdc/ledger/ledger.hpp"

#include <fstream>

namespace cbdc::ledger {

Ledger::Ledger(LedgerConfig config, asset::MintKeyDirectory mint_keys, ValidatorDirectory validators)
    : config_(config), mint_keys_(std::move(mint_keys)), validators_(std::move(validators)) {
  if (config_.quorum == 0 || config_.quorum > validators_.size())
    fail(ErrorCode::ConfigInvalid, "quorum must be between 1 and the number of validators");
}

void Ledger::register_bank(const std::string& bank_id) { banks_.insert(bank_id); }

void Ledger::check_spendable(const asset::Asset& a, std::set<Nullifier>& batch) const {
  if (a.history.empty()) fail(ErrorCode::InvalidAsset, "asset " + a.serial_hex() + " has no transfer to record");
  if (auto report = asset::verify_asset(a, mint_keys_); !report.valid)
    fail(ErrorCode::InvalidAsset, "asset " + a.serial_hex() + " failed " +
                                      std::string(asset::check_name(*report.first_failure)) + ": " + report.detail);
  const std::uint64_t last = a.history.back().index;
  for (std::uint64_t i = 0; i < last; ++i)
    if (!spent_.count(asset::nullifier(a.serial, i)))
      fail(ErrorCode::InvalidAsset, "asset " + a.serial_hex() + " carries an unrecorded transfer");
  Nullifier n = asset::nullifier(a.serial, last);
  if (spent_.count(n) || reserved_.count(n) || !batch.insert(n).second)
    fail(ErrorCode::AlreadySpent, "asset " + a.serial_hex() + " transfer " + std::to_string(last) + " already recorded");
}

ProposalId Ledger::submit_spend_batch(std::vector<SpendRequest> batch) {
  if (batch.empty()) fail(ErrorCode::InvalidArgument, "empty spend batch");
  std::set<Nullifier> nullifiers;
  for (const auto& req : batch) {
    if (req.asset.history.empty() || req.asset.history.back().invoice_ref != req.invoice_ref)
      fail(ErrorCode::InvalidAsset, "final transfer does not reference the invoice");
    if (req.invoice_ref.merchant_id.empty()) fail(ErrorCode::InvalidAsset, "spend without recipient");
    check_spendable(req.asset, nullifiers);
    if (clock_ < req.asset.issue_tick + config_.cooldown)
      fail(ErrorCode::HotAsset, "asset " + req.asset.serial_hex() + " spendable from tick " +
                                    std::to_string(req.asset.issue_tick + config_.cooldown));
  }
  reserved_.insert(nullifiers.begin(), nullifiers.end());
  Proposal p;
  p.id = next_proposal_++;
  p.requests = std::move(batch);
  queue_.push_back(std::move(p));
  ProposalId id = queue_.back().id;
  if (!active_) start_next();
  return id;
}

LedgerEntry Ledger::make_entry(EntryKind kind, std::optional<Nullifier> n, std::string recipient, Amount amount,
                               const Digest& prev) const {
  LedgerEntry e;
  e.kind = kind;
  e.nullifier = n;
  e.recipient_id = std::move(recipient);
  e.amount = amount;
  e.tick = clock_;
  e.prev_hash = prev;
  e.entry_hash = compute_entry_hash(e);
  return e;
}

void Ledger::build_entries(Proposal& p) {
  p.entries.clear();
  Digest prev = ledger_digest();
  for (const auto& req : p.requests) {
    p.entries.push_back(make_entry(EntryKind::Spend, asset::latest_nullifier(req.asset), req.invoice_ref.merchant_id,
                                   req.asset.denomination, prev));
    prev = p.entries.back().entry_hash;
  }
}

void Ledger::start_next() {
  if (active_ || queue_.empty()) return;
  active_ = std::move(queue_.front());
  queue_.pop_front();
  build_entries(*active_);
  active_->round = 0;
  active_->deadline = clock_ + config_.quorum_timeout;
  effects_.push_back(AckRequest{active_->id, active_->round, active_->deadline, active_->entries});
}

void Ledger::rebase_active() {
  if (!active_) return;
  build_entries(*active_);
  ++active_->round;
  active_->acks.clear();
  effects_.push_back(AckRequest{active_->id, active_->round, active_->deadline, active_->entries});
}

void Ledger::on_ack(ProposalId proposal, std::uint64_t round, const std::string& validator_id,
                    const std::vector<Ack>& acks) {
  if (!active_ || active_->id != proposal || active_->round != round) return;
  auto key = validators_.find(validator_id);
  if (key == validators_.end() || acks.size() != active_->entries.size()) return;
  for (std::size_t i = 0; i < acks.size(); ++i) {
    if (acks[i].validator_id != validator_id) return;
    if (!crypto::verify_signature(active_->entries[i].entry_hash, acks[i].signature, key->second)) return;
  }
  active_->acks[validator_id] = acks;
  if (active_->acks.size() >= config_.quorum) finish_active(std::nullopt);
}

void Ledger::on_deadline(ProposalId proposal) {
  if (!active_ || active_->id != proposal) return;
  finish_active(ErrorCode::QuorumTimeout);
}

void Ledger::finish_active(std::optional<ErrorCode> error) {
  Proposal p = std::move(*active_);
  active_.reset();
  for (const auto& e : p.entries) reserved_.erase(*e.nullifier);

  SpendOutcome outcome;
  outcome.proposal = p.id;
  outcome.error = error;
  if (!error) {
    for (std::size_t i = 0; i < p.entries.size(); ++i) {
      QuorumCertificate qc;
      qc.entry_hash = p.entries[i].entry_hash;
      for (const auto& [validator, acks] : p.acks) qc.acks.push_back(acks[i]);
      outcome.certificates.push_back(std::move(qc));
      append(p.entries[i]);
    }
    outcome.entries = p.entries;
    effects_.push_back(CommitNotice{p.entries});
  }
  effects_.push_back(std::move(outcome));
  start_next();
}

void Ledger::append(LedgerEntry entry) {
  if (entry.prev_hash != ledger_digest()) throw std::logic_error("ledger append out of order");
  if (entry.nullifier) spent_.emplace(*entry.nullifier, entry.tick);
  by_hash_.emplace(entry.entry_hash, entries_.size());
  entries_.push_back(std::move(entry));
}

std::vector<LedgerEffect> Ledger::drain_effects() {
  std::vector<LedgerEffect> out;
  out.swap(effects_);
  return out;
}

Digest Ledger::register_issue_batch(const std::string& bank_id, const std::map<Amount, std::int64_t>& counts) {
  if (!knows_bank(bank_id)) fail(ErrorCode::UnknownBank, "unknown bank " + bank_id);
  Amount total = 0;
  for (const auto& [denom, count] : counts) total += denom * count;
  LedgerEntry e = make_entry(EntryKind::IssueBatch, std::nullopt, bank_id, total, ledger_digest());
  Digest hash = e.entry_hash;
  append(e);
  effects_.push_back(CommitNotice{{e}});
  rebase_active();
  return hash;
}

std::vector<Digest> Ledger::register_redemption(const std::string& bank_id, std::span<const asset::Asset> assets) {
  if (!knows_bank(bank_id)) fail(ErrorCode::UnknownBank, "unknown bank " + bank_id);
  if (assets.empty()) return {};
  std::set<Nullifier> batch;
  for (const auto& a : assets) check_spendable(a, batch);
  std::vector<Digest> hashes;
  std::vector<LedgerEntry> appended;
  for (const auto& a : assets) {
    LedgerEntry e = make_entry(EntryKind::Redemption, asset::latest_nullifier(a), bank_id, a.denomination,
                               ledger_digest());
    hashes.push_back(e.entry_hash);
    appended.push_back(e);
    append(std::move(e));
  }
  effects_.push_back(CommitNotice{std::move(appended)});
  rebase_active();
  return hashes;
}

NullifierStatus Ledger::query_nullifier(const Nullifier& n) const {
  auto it = spent_.find(n);
  if (it == spent_.end()) return {};
  return NullifierStatus{true, it->second};
}

std::optional<LedgerEntry> Ledger::find_entry(const Digest& entry_hash) const {
  auto it = by_hash_.find(entry_hash);
  if (it == by_hash_.end()) return std::nullopt;
  return entries_[it->second];
}

Digest Ledger::ledger_digest() const { return entries_.empty() ? Digest::zero() : entries_.back().entry_hash; }

void Ledger::save_jsonl(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::trunc);
  if (!out) fail(ErrorCode::InvalidArgument, "cannot write " + path.string());
  for (const auto& e : entries_) out << entry_to_json(e).dump() << '\n';
}

std::vector<QuorumCertificate> submit_spend(Ledger& ledger, std::vector<SpendRequest> batch,
                                            std::span<Validator> validators,
                                            const std::function<bool(const std::string&)>& reachable) {
  if (ledger.has_active_proposal()) fail(ErrorCode::InvalidArgument, "another spend is in flight");
  auto can_reach = [&](const Validator& v) { return !reachable || reachable(v.id()); };
  ProposalId id = ledger.submit_spend_batch(std::move(batch));
  bool timed_out = false;
  for (;;) {
    auto effects = ledger.drain_effects();
    if (effects.empty()) {
      if (timed_out) throw std::logic_error("spend did not resolve");
      ledger.on_deadline(id);
      timed_out = true;
      continue;
    }
    for (auto& effect : effects) {
      if (auto* req = std::get_if<AckRequest>(&effect)) {
        for (auto& v : validators) {
          if (!can_reach(v)) continue;
          if (auto acks = v.acknowledge(req->entries)) ledger.on_ack(req->proposal, req->round, v.id(), *acks);
        }
      } else if (auto* commit = std::get_if<CommitNotice>(&effect)) {
        for (auto& v : validators)
          if (can_reach(v)) v.apply_commit(commit->entries);
      } else if (auto* outcome = std::get_if<SpendOutcome>(&effect); outcome && outcome->proposal == id) {
        if (outcome->error) fail(*outcome->error, "spend batch failed");
        return outcome->certificates;
      }
    }
  }
}

ReplayResult verify_chain(std::span<const LedgerEntry> entries) {
  ReplayResult r;
  Digest prev = Digest::zero();
  std::set<Nullifier> seen;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const LedgerEntry& e = entries[i];
    if (e.prev_hash != prev) {
      r.error = "entry " + std::to_string(i) + ": prev_hash does not link";
      return r;
    }
    if (compute_entry_hash(e) != e.entry_hash) {
      r.error = "entry " + std::to_string(i) + ": entry_hash mismatch";
      return r;
    }
    if (e.nullifier && !seen.insert(*e.nullifier).second) {
      r.error = "entry " + std::to_string(i) + ": nullifier recorded twice";
      return r;
    }
    if (e.kind != EntryKind::IssueBatch && (!e.nullifier || e.recipient_id.empty())) {
      r.error = "entry " + std::to_string(i) + ": missing nullifier or recipient";
      return r;
    }
    prev = e.entry_hash;
  }
  r.ok = true;
  r.entries = entries.size();
  r.digest = prev;
  return r;
}

ReplayResult replay_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) return ReplayResult{false, 0, Digest::zero(), "cannot open " + path.string()};
  std::vector<LedgerEntry> entries;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      entries.push_back(entry_from_json(Json::parse(line)));
    } catch (const std::exception& ex) {
      return ReplayResult{false, entries.size(), Digest::zero(), "line " + std::to_string(line_no) + ": " + ex.what()};
    }
  }
  return verify_chain(entries);
}

}  // namespace cbdc::ledger
