#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include "cbdc/asset/asset.hpp"
#include "cbdc/asset/codec.hpp"
#include "cbdc/ledger/ledger.hpp"

namespace cbdc::mint {

using crypto::BigInt;

using DenominationKeys = std::map<Amount, crypto::SigningKeyPair>;

DenominationKeys generate_denomination_keys(std::span<const Amount> denominations, unsigned bits,
                                            crypto::RngStream& rng);

asset::MintKeyDirectory public_directory(const DenominationKeys& keys);

struct BlindItem {
  Amount denomination = 0;
  BigInt blinded;
};

struct TranscriptRow {
  std::string bank_id;
  BigInt blinded;
  Amount denomination = 0;
  Tick tick = 0;
};

struct MintStats {
  std::map<Amount, std::int64_t> issued;
  std::map<Amount, std::int64_t> redeemed;
  std::map<Amount, std::int64_t> outstanding;

  Amount outstanding_value() const;
};

Json stats_to_json(const MintStats& s);

// The central bank. Signs blinded commitments for registered banks and keeps
// only aggregate counts: it never learns serials, owners or final signatures.
class MintAuthority {
 public:
  MintAuthority(DenominationKeys keys, ledger::Ledger& ledger);

  asset::MintKeyDirectory public_keys() const;
  bool has_denomination(Amount d) const { return signers_.count(d) > 0; }

  // Throws DuplicateBank.
  void register_bank(const std::string& bank_id, const crypto::PublicKey& bank_key);

  // Throws UnknownBank, UnknownDenomination or OutOfRange; signs nothing unless
  // every item is acceptable.
  std::vector<BigInt> issue(const std::string& bank_id, std::span<const BlindItem> batch);

  // Cancels a prior issuance whose signatures never reached a usable state.
  void void_issue(const std::string& bank_id, const std::map<Amount, std::int64_t>& counts);

  // Every asset's final transfer must target the bank's registered key.
  Amount redeem(const std::string& bank_id, std::span<const asset::Asset> assets);

  MintStats stats() const;
  const std::vector<TranscriptRow>& transcript() const { return transcript_; }

  // Everything the mint stores, for privacy audits.
  Json state_json() const;

 private:
  const crypto::PublicKey& bank_key(const std::string& bank_id) const;

  std::map<Amount, crypto::BlindSigner> signers_;
  std::map<std::string, crypto::PublicKey> banks_;
  std::map<Amount, std::int64_t> issued_;
  std::map<Amount, std::int64_t> redeemed_;
  std::vector<TranscriptRow> transcript_;
  ledger::Ledger& ledger_;
};

}  // namespace cbdc::mint
