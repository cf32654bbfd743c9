#include "cbdc/bank/bank.hpp"

#include <cstdio>
#include <fstream>

namespace cbdc::bank {

std::string_view holder_kind_name(HolderKind kind) {
  return kind == HolderKind::Merchant ? "merchant" : "consumer";
}

IntermediaryBank::IntermediaryBank(std::string bank_id, crypto::SigningKeyPair key, mint::MintAuthority& mint,
                                   const ledger::Ledger& ledger)
    : id_(std::move(bank_id)), key_(std::move(key)), mint_(mint), ledger_(ledger) {}

std::string IntermediaryBank::open_account(HolderKind kind, const std::string& legal_identity,
                                           Amount opening_balance) {
  if (opening_balance < 0) fail(ErrorCode::InvalidArgument, "opening balance must not be negative");
  if (kind == HolderKind::Merchant && legal_identity.empty())
    fail(ErrorCode::InvalidArgument, "merchant accounts need a legal identity");
  char buf[32];
  std::snprintf(buf, sizeof buf, "-acct-%04llu", static_cast<unsigned long long>(next_account_++));
  std::string account_id = id_ + buf;
  accounts_.emplace(account_id, Account{account_id, kind, opening_balance, legal_identity});
  return account_id;
}

Account& IntermediaryBank::mutable_account(const std::string& account_id) {
  auto it = accounts_.find(account_id);
  if (it == accounts_.end()) fail(ErrorCode::UnknownAccount, "no account " + account_id + " at " + id_);
  return it->second;
}

const Account& IntermediaryBank::account(const std::string& account_id) const {
  auto it = accounts_.find(account_id);
  if (it == accounts_.end()) fail(ErrorCode::UnknownAccount, "no account " + account_id + " at " + id_);
  return it->second;
}

Amount IntermediaryBank::balance(const std::string& account_id) const { return account(account_id).balance; }

Amount IntermediaryBank::total_balances() const {
  Amount total = 0;
  for (const auto& [id, a] : accounts_) total += a.balance;
  return total;
}

WithdrawalResult IntermediaryBank::process_withdrawal(const std::string& account_id, Amount amount,
                                                      std::span<const mint::BlindItem> batch) {
  Account& acct = mutable_account(account_id);
  if (amount <= 0) fail(ErrorCode::InvalidArgument, "withdrawal amount must be positive");
  Amount sum = 0;
  std::map<Amount, std::int64_t> counts;
  for (const auto& item : batch) {
    sum += item.denomination;
    ++counts[item.denomination];
  }
  if (sum != amount)
    fail(ErrorCode::AmountMismatch, "batch sums to " + std::to_string(sum) + ", requested " + std::to_string(amount));
  if (amount > acct.balance) fail(ErrorCode::InsufficientFunds, "balance " + std::to_string(acct.balance) + " < " + std::to_string(amount));

  acct.balance -= amount;
  WithdrawalResult result;
  try {
    result.signatures = mint_.issue(id_, batch);
  } catch (...) {
    acct.balance += amount;
    throw;
  }
  WithdrawalReceipt receipt{withdrawals_.size() + 1, account_id, amount, counts, ledger_.current_tick(), false};
  withdrawals_.push_back(receipt);
  result.receipt = receipt;
  return result;
}

void IntermediaryBank::reverse_withdrawal(std::uint64_t receipt_id) {
  if (receipt_id == 0 || receipt_id > withdrawals_.size())
    fail(ErrorCode::InvalidArgument, "unknown withdrawal receipt");
  WithdrawalReceipt& r = withdrawals_[receipt_id - 1];
  if (r.reversed) fail(ErrorCode::InvalidArgument, "withdrawal already reversed");
  mint_.void_issue(id_, r.counts);
  mutable_account(r.account_id).balance += r.amount;
  r.reversed = true;
}

Amount IntermediaryBank::deposit_merchant(const std::string& merchant_account_id,
                                          std::span<const asset::Asset> assets) {
  Account& acct = mutable_account(merchant_account_id);
  if (acct.holder_kind != HolderKind::Merchant || acct.aml_record.empty())
    fail(ErrorCode::InvalidArgument, merchant_account_id + " is not an identified merchant account");
  if (assets.empty()) return 0;
  const crypto::Digest mine = key_hash();
  for (const auto& a : assets) {
    if (a.history.empty()) fail(ErrorCode::WrongRecipient, "asset " + a.serial_hex() + " was never paid to a merchant");
    const auto& last = a.history.back();
    if (!last.invoice_ref || last.invoice_ref->merchant_id != merchant_account_id || last.to_key_hash != mine)
      fail(ErrorCode::WrongRecipient, "asset " + a.serial_hex() + " does not belong to " + merchant_account_id);
  }
  Amount credited = mint_.redeem(id_, assets);
  acct.balance += credited;
  aml_log_.push_back(AmlRow{merchant_account_id, acct.aml_record, credited, ledger_.current_tick()});
  ++merchant_credits_;
  return credited;
}

Json aml_row_to_json(const AmlRow& row) {
  Json j;
  j["account_id"] = row.account_id;
  j["merchant_identity"] = row.merchant_identity;
  j["amount"] = row.amount;
  j["tick"] = row.tick;
  return j;
}

void IntermediaryBank::save_aml_jsonl(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::trunc);
  if (!out) fail(ErrorCode::InvalidArgument, "cannot write " + path.string());
  for (const auto& row : aml_log_) out << aml_row_to_json(row).dump() << '\n';
}

Json IntermediaryBank::state_json() const {
  Json j;
  j["bank_id"] = id_;
  j["public_key"] = asset::public_key_to_json(key_.public_part);
  Json accounts = Json::array();
  for (const auto& [id, a] : accounts_) {
    Json aj;
    aj["account_id"] = a.account_id;
    aj["holder_kind"] = holder_kind_name(a.holder_kind);
    aj["balance"] = a.balance;
    aj["aml_record"] = a.aml_record;
    accounts.push_back(std::move(aj));
  }
  j["accounts"] = std::move(accounts);
  Json withdrawals = Json::array();
  for (const auto& w : withdrawals_) {
    Json wj;
    wj["id"] = w.id;
    wj["account_id"] = w.account_id;
    wj["amount"] = w.amount;
    wj["tick"] = w.tick;
    wj["reversed"] = w.reversed;
    withdrawals.push_back(std::move(wj));
  }
  j["withdrawals"] = std::move(withdrawals);
  Json aml = Json::array();
  for (const auto& row : aml_log_) aml.push_back(aml_row_to_json(row));
  j["aml_log"] = std::move(aml);
  return j;
}

}  // namespace cbdc::bank
