#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include "cbdc/bank/bank.hpp"
#include "cbdc/wallet/invoice.hpp"

namespace cbdc::merchant {

using wallet::Invoice;

enum class InvoiceState { Open, Paid };

class MerchantTill {
 public:
  // merchant_id is the merchant's account id at its bank; it is what the
  // ledger records as the recipient of every payment.
  MerchantTill(std::string merchant_id, crypto::SigningKeyPair key, const ledger::Ledger& ledger,
               Tick invoice_ttl = 20);

  const std::string& id() const { return id_; }
  crypto::Digest key_hash() const { return crypto::key_hash(key_.public_part); }

  // Throws InvalidArgument for non-positive amounts.
  Invoice create_invoice(Amount amount, Tick current_tick);

  // Re-verifies a payment instead of trusting the payer: every asset must be
  // valid, transferred to this till for this invoice, and backed by a quorum
  // certificate for the matching ledger Spend entry. Assets that pass those
  // checks belong to the till from then on, so they are kept even when the
  // invoice check that follows fails (WrongInvoice, AmountMismatch, Expired).
  void accept_payment(const Invoice& invoice, std::span<const asset::Asset> assets,
                      std::span<const ledger::QuorumCertificate> certificates);

  // Transfers all holdings to the bank and deposits them. Holdings are cleared
  // only on success. Returns 0 when there is nothing to deposit.
  Amount deposit(bank::IntermediaryBank& bank);

  InvoiceState invoice_state(const std::string& invoice_id) const;
  // Most recent open invoice, optionally of a given amount.
  std::optional<Invoice> latest_open_invoice(std::optional<Amount> amount = std::nullopt) const;
  const std::map<std::string, Invoice>& invoices() const { return invoices_; }

  const std::vector<asset::Asset>& holdings() const { return holdings_; }
  Amount unredeemed_value() const;
  Amount paid_total() const { return paid_total_; }
  Amount unapplied_total() const { return unapplied_total_; }
  Amount credited_total() const { return credited_total_; }
  std::size_t accepted_payments(const std::string& invoice_id) const;

 private:
  std::string id_;
  crypto::SigningKeyPair key_;
  const ledger::Ledger& ledger_;
  Tick invoice_ttl_;
  std::uint64_t next_invoice_ = 1;
  std::uint64_t next_deposit_ = 1;
  std::map<std::string, Invoice> invoices_;
  std::map<std::string, InvoiceState> states_;
  std::map<std::string, std::size_t> accepted_;
  std::vector<std::string> open_order_;
  std::vector<asset::Asset> holdings_;
  Amount paid_total_ = 0;
  Amount unapplied_total_ = 0;
  Amount credited_total_ = 0;
};

}  // namespace cbdc::merchant
