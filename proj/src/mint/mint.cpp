#include "cbdc/mint/mint.hpp"

namespace cbdc::mint {

DenominationKeys generate_denomination_keys(std::span<const Amount> denominations, unsigned bits,
                                            crypto::RngStream& rng) {
  DenominationKeys keys;
  for (Amount d : denominations) {
    if (d <= 0) fail(ErrorCode::ConfigInvalid, "denominations must be positive");
    if (keys.count(d)) fail(ErrorCode::ConfigInvalid, "duplicate denomination");
    keys.emplace(d, crypto::generate_keypair(bits, rng));
  }
  return keys;
}

asset::MintKeyDirectory public_directory(const DenominationKeys& keys) {
  asset::MintKeyDirectory out;
  for (const auto& [d, k] : keys) out.emplace(d, k.public_part);
  return out;
}

Amount MintStats::outstanding_value() const {
  Amount total = 0;
  for (const auto& [d, count] : outstanding) total += d * count;
  return total;
}

MintAuthority::MintAuthority(DenominationKeys keys, ledger::Ledger& ledger) : ledger_(ledger) {
  for (auto& [d, k] : keys) {
    signers_.emplace(d, crypto::BlindSigner(std::move(k)));
    issued_[d] = 0;
    redeemed_[d] = 0;
  }
}

asset::MintKeyDirectory MintAuthority::public_keys() const {
  asset::MintKeyDirectory out;
  for (const auto& [d, s] : signers_) out.emplace(d, s.public_key());
  return out;
}

void MintAuthority::register_bank(const std::string& bank_id, const crypto::PublicKey& bank_key) {
  if (bank_id.empty()) fail(ErrorCode::InvalidArgument, "bank id must not be empty");
  if (!banks_.emplace(bank_id, bank_key).second) fail(ErrorCode::DuplicateBank, "bank " + bank_id + " already registered");
  ledger_.register_bank(bank_id);
}

const crypto::PublicKey& MintAuthority::bank_key(const std::string& bank_id) const {
  auto it = banks_.find(bank_id);
  if (it == banks_.end()) fail(ErrorCode::UnknownBank, "bank " + bank_id + " is not registered with the mint");
  return it->second;
}

std::vector<BigInt> MintAuthority::issue(const std::string& bank_id, std::span<const BlindItem> batch) {
  bank_key(bank_id);
  for (const auto& item : batch) {
    auto it = signers_.find(item.denomination);
    if (it == signers_.end())
      fail(ErrorCode::UnknownDenomination, "no key for denomination " + std::to_string(item.denomination));
    if (item.blinded <= 0 || item.blinded >= it->second.public_key().modulus)
      fail(ErrorCode::OutOfRange, "blinded value outside the modulus range");
  }
  std::vector<BigInt> out;
  std::map<Amount, std::int64_t> counts;
  for (const auto& item : batch) {
    out.push_back(signers_.at(item.denomination).sign(item.blinded));
    transcript_.push_back(TranscriptRow{bank_id, item.blinded, item.denomination, ledger_.current_tick()});
    ++issued_[item.denomination];
    ++counts[item.denomination];
  }
  if (!batch.empty()) ledger_.register_issue_batch(bank_id, counts);
  return out;
}

void MintAuthority::void_issue(const std::string& bank_id, const std::map<Amount, std::int64_t>& counts) {
  bank_key(bank_id);
  std::map<Amount, std::int64_t> negated;
  for (const auto& [d, c] : counts) {
    if (!signers_.count(d)) fail(ErrorCode::UnknownDenomination, "no key for denomination " + std::to_string(d));
    if (issued_[d] - redeemed_[d] < c) fail(ErrorCode::InvalidArgument, "void exceeds outstanding issuance");
  }
  for (const auto& [d, c] : counts) {
    issued_[d] -= c;
    negated[d] = -c;
  }
  ledger_.register_issue_batch(bank_id, negated);
}

Amount MintAuthority::redeem(const std::string& bank_id, std::span<const asset::Asset> assets) {
  const crypto::Digest bank_hash = crypto::key_hash(bank_key(bank_id));
  const auto directory = public_keys();
  for (const auto& a : assets) {
    if (a.history.empty() || a.history.back().to_key_hash != bank_hash)
      fail(ErrorCode::InvalidAsset, "asset " + a.serial_hex() + " is not transferred to bank " + bank_id);
    if (auto report = asset::verify_asset(a, directory); !report.valid)
      fail(ErrorCode::InvalidAsset, "asset " + a.serial_hex() + ": " + report.detail);
  }
  ledger_.register_redemption(bank_id, assets);
  Amount credited = 0;
  for (const auto& a : assets) {
    ++redeemed_[a.denomination];
    credited += a.denomination;
  }
  return credited;
}

Json stats_to_json(const MintStats& s) {
  auto by_denom = [](const std::map<Amount, std::int64_t>& m) {
    Json j = Json::object();
    for (const auto& [d, c] : m) j[std::to_string(d)] = c;
    return j;
  };
  return Json{{"issued", by_denom(s.issued)},
              {"redeemed", by_denom(s.redeemed)},
              {"outstanding", by_denom(s.outstanding)},
              {"outstanding_value", s.outstanding_value()}};
}

MintStats MintAuthority::stats() const {
  MintStats s;
  s.issued = issued_;
  s.redeemed = redeemed_;
  for (const auto& [d, c] : issued_) s.outstanding[d] = c - redeemed_.at(d);
  return s;
}

Json MintAuthority::state_json() const {
  Json j;
  Json keys = Json::object();
  for (const auto& [d, s] : signers_) keys[std::to_string(d)] = asset::public_key_to_json(s.public_key());
  j["denomination_keys"] = std::move(keys);
  Json banks = Json::object();
  for (const auto& [id, k] : banks_) banks[id] = asset::public_key_to_json(k);
  j["registered_banks"] = std::move(banks);
  Json issued = Json::object(), redeemed = Json::object();
  for (const auto& [d, c] : issued_) issued[std::to_string(d)] = c;
  for (const auto& [d, c] : redeemed_) redeemed[std::to_string(d)] = c;
  j["issued_totals"] = std::move(issued);
  j["redeemed_totals"] = std::move(redeemed);
  Json rows = Json::array();
  for (const auto& r : transcript_) {
    Json row;
    row["bank_id"] = r.bank_id;
    row["blinded"] = crypto::to_hex(r.blinded);
    row["denomination"] = r.denomination;
    row["tick"] = r.tick;
    rows.push_back(std::move(row));
  }
  j["transcript"] = std::move(rows);
  Json signer_rows = Json::array();
  for (const auto& [d, s] : signers_)
    for (const auto& r : s.transcript()) signer_rows.push_back({crypto::to_hex(r.blinded), crypto::to_hex(r.signature)});
  j["signer_transcript"] = std::move(signer_rows);
  return j;
}

}  // namespace cbdc::mint
