#pragma once

#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "cbdc/mint/mint.hpp"

namespace cbdc::bank {

enum class HolderKind { Consumer, Merchant };

std::string_view holder_kind_name(HolderKind kind);

struct Account {
  std::string account_id;
  HolderKind holder_kind = HolderKind::Consumer;
  Amount balance = 0;
  std::string aml_record;  // holder legal identity
};

struct AmlRow {
  std::string account_id;
  std::string merchant_identity;
  Amount amount = 0;
  Tick tick = 0;
};

// What the bank remembers about a withdrawal: who and how much, never which
// tokens.
struct WithdrawalReceipt {
  std::uint64_t id = 0;
  std::string account_id;
  Amount amount = 0;
  std::map<Amount, std::int64_t> counts;
  Tick tick = 0;
  bool reversed = false;
};

struct WithdrawalResult {
  std::vector<crypto::BigInt> signatures;  // batch order
  WithdrawalReceipt receipt;
};

// A tier-two bank: holds fiat accounts, relays blinded batches to the mint and
// takes merchant deposits, identifying every merchant it credits.
class IntermediaryBank {
 public:
  IntermediaryBank(std::string bank_id, crypto::SigningKeyPair key, mint::MintAuthority& mint,
                   const ledger::Ledger& ledger);

  const std::string& id() const { return id_; }
  const crypto::PublicKey& public_key() const { return key_.public_part; }
  crypto::Digest key_hash() const { return crypto::key_hash(key_.public_part); }

  // Merchants must supply a legal identity. Throws InvalidArgument.
  std::string open_account(HolderKind kind, const std::string& legal_identity, Amount opening_balance);

  // Throws UnknownAccount, InvalidArgument, AmountMismatch, InsufficientFunds
  // or a mint error (the debit is undone in that case).
  WithdrawalResult process_withdrawal(const std::string& account_id, Amount amount,
                                      std::span<const mint::BlindItem> batch);

  // Re-credits a withdrawal whose signatures the wallet could not use and
  // voids the matching issuance at the mint.
  void reverse_withdrawal(std::uint64_t receipt_id);

  // Each asset's latest transfer must name this merchant account and target
  // this bank's key. Throws WrongRecipient, UnknownAccount, InvalidArgument or
  // propagated InvalidAsset / AlreadySpent.
  Amount deposit_merchant(const std::string& merchant_account_id, std::span<const asset::Asset> assets);

  Amount balance(const std::string& account_id) const;
  const Account& account(const std::string& account_id) const;
  const std::map<std::string, Account>& accounts() const { return accounts_; }
  Amount total_balances() const;

  const std::vector<AmlRow>& aml_log() const { return aml_log_; }
  std::size_t merchant_credits() const { return merchant_credits_; }
  void save_aml_jsonl(const std::filesystem::path& path) const;

  // Everything the bank stores, for privacy audits.
  Json state_json() const;

 private:
  Account& mutable_account(const std::string& account_id);

  std::string id_;
  crypto::SigningKeyPair key_;
  mint::MintAuthority& mint_;
  const ledger::Ledger& ledger_;
  std::map<std::string, Account> accounts_;
  std::vector<WithdrawalReceipt> withdrawals_;
  std::vector<AmlRow> aml_log_;
  std::size_t merchant_credits_ = 0;
  std::uint64_t next_account_ = 1;
};

Json aml_row_to_json(const AmlRow& row);

}  // namespace cbdc::bank
