#pragma once

#include <filesystem>
#include <map>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "cbdc/bank/bank.hpp"
#include "cbdc/ledger/ledger.hpp"
#include "cbdc/wallet/invoice.hpp"

namespace cbdc::wallet {

struct WalletParams {
  std::vector<Amount> denominations = kDefaultDenominations;
  unsigned key_bits = crypto::kToyBits;
  Tick cooldown = 5;

  bool operator==(const WalletParams&) const = default;
};

// The wallet's only route to fiat: a bank that relays to the mint.
class WithdrawalService {
 public:
  virtual ~WithdrawalService() = default;
  virtual bank::WithdrawalResult request(const std::string& account_id, Amount amount,
                                         std::span<const mint::BlindItem> batch) = 0;
  virtual void reverse(std::uint64_t receipt_id) = 0;
};

class BankWithdrawalService : public WithdrawalService {
 public:
  explicit BankWithdrawalService(bank::IntermediaryBank& bank) : bank_(bank) {}
  bank::WithdrawalResult request(const std::string& account_id, Amount amount,
                                 std::span<const mint::BlindItem> batch) override {
    return bank_.process_withdrawal(account_id, amount, batch);
  }
  void reverse(std::uint64_t receipt_id) override { bank_.reverse_withdrawal(receipt_id); }

 private:
  bank::IntermediaryBank& bank_;
};

struct HeldAsset {
  asset::Asset asset;
  crypto::SigningKeyPair owner_key;
  std::set<std::uint64_t> payments;  // pending payments that reference it

  bool in_flight() const { return !payments.empty(); }
};

struct PendingBlind {
  asset::Serial serial{};
  Amount denomination = 0;
  crypto::BlindingFactor factor;
  crypto::SigningKeyPair owner_key;
};

struct WalletBalance {
  Amount total = 0;
  Amount spendable = 0;
  Amount hot = 0;        // everything not spendable right now
  Amount in_flight = 0;  // part of hot: reserved by an unresolved payment
  std::map<Amount, std::int64_t> per_denomination;
};

Json balance_to_json(const WalletBalance& b);

struct PreparedPayment {
  std::uint64_t payment_id = 0;
  Invoice invoice;
  std::vector<ledger::SpendRequest> requests;
};

struct CompletedPayment {
  PaymentProof proof;
  std::vector<asset::Asset> transferred;  // carrying the final transfer to the merchant
};

/// Non-custodial consumer wallet.
///
/// Holds the only copies of owner secret keys and blinding factors. Every
/// withdrawn asset gets a fresh owner key pair and blinding factor, so no two
/// assets can be linked through their owner hashes. Nothing that identifies
/// the holder (linked account, stream id, blinding factors) ever leaves in a
/// payment.
class Wallet {
 public:
  Wallet(std::string wallet_id, std::string linked_account, crypto::RngStream rng, WalletParams params);

  const std::string& id() const { return id_; }
  const WalletParams& params() const { return params_; }

  // Splits the amount into denominations, blinds a fresh commitment per token
  // and unblinds the returned signatures. A single bad signature rolls the
  // whole batch back (VerificationFailed, bank reversal).
  std::vector<asset::Asset> withdraw(Amount amount, WithdrawalService& bank, const asset::MintKeyDirectory& mint_keys,
                                     Tick now);

  // Selects cooled assets for the exact invoice amount and signs their
  // transfers to the merchant. The assets stay held, marked in flight, until
  // complete_payment or fail_payment. Throws InvoiceExpired, HotAsset or
  // CannotMakeAmount.
  PreparedPayment prepare_payment(const Invoice& invoice, Tick now);

  // Signs the same assets over to a second invoice of equal amount. Only a
  // misbehaving wallet would send this; the ledger must refuse one of them.
  PreparedPayment prepare_conflicting_payment(const PreparedPayment& original, const Invoice& other);

  CompletedPayment complete_payment(std::uint64_t payment_id, std::vector<ledger::QuorumCertificate> certificates);
  void fail_payment(std::uint64_t payment_id);

  // Synchronous payment against an in-process ledger.
  CompletedPayment pay(const Invoice& invoice, ledger::Ledger& ledger, std::span<ledger::Validator> validators,
                       const std::function<bool(const std::string&)>& reachable = {});

  WalletBalance balance(Tick now) const;
  const std::vector<HeldAsset>& holdings() const { return holdings_; }
  const std::vector<PendingBlind>& pending_blinds() const { return pending_blinds_; }
  std::size_t pending_payments() const { return payments_.size(); }

  Amount total_withdrawn() const { return total_withdrawn_; }
  Amount total_paid() const { return total_paid_; }
  // Local audit trail; never transmitted.
  const std::vector<std::string>& used_blinding_factors() const { return used_factors_; }
  const std::vector<std::string>& used_owner_hashes() const { return used_owner_hashes_; }
  const std::string& linked_account() const { return linked_account_; }
  const std::string& rng_stream_id() const { return rng_.id(); }

  Json state_json() const;
  void persist(const std::filesystem::path& path) const;
  // Throws CorruptFile on anything short of a complete, well-formed file.
  static Wallet load(const std::filesystem::path& path);
  static Wallet from_json(const Json& j);

 private:
  struct Pending {
    Invoice invoice;
    std::vector<asset::Serial> serials;
    std::vector<asset::Asset> transferred;
  };

  HeldAsset* find(const asset::Serial& serial);
  PreparedPayment register_payment(const Invoice& invoice, std::vector<std::size_t> picked);

  std::string id_;
  std::string linked_account_;
  crypto::RngStream rng_;
  WalletParams params_;
  std::vector<HeldAsset> holdings_;
  std::vector<PendingBlind> pending_blinds_;
  std::map<std::uint64_t, Pending> payments_;
  std::uint64_t next_payment_id_ = 1;
  Amount total_withdrawn_ = 0;
  Amount total_paid_ = 0;
  std::vector<std::string> used_factors_;
  std::vector<std::string> used_owner_hashes_;
};

}  // namespace cbdc::wallet
