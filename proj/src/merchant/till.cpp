#include "cbdc/merchant/till.hpp"

#include <algorithm>

namespace cbdc::merchant {

MerchantTill::MerchantTill(std::string merchant_id, crypto::SigningKeyPair key, const ledger::Ledger& ledger,
                           Tick invoice_ttl)
    : id_(std::move(merchant_id)), key_(std::move(key)), ledger_(ledger), invoice_ttl_(invoice_ttl) {}

Invoice MerchantTill::create_invoice(Amount amount, Tick current_tick) {
  if (amount <= 0) fail(ErrorCode::InvalidArgument, "invoice amount must be positive");
  Invoice inv{id_, id_ + "/inv-" + std::to_string(next_invoice_++), amount, current_tick + invoice_ttl_, key_hash()};
  invoices_.emplace(inv.invoice_id, inv);
  states_[inv.invoice_id] = InvoiceState::Open;
  open_order_.push_back(inv.invoice_id);
  return inv;
}

void MerchantTill::accept_payment(const Invoice& invoice, std::span<const asset::Asset> assets,
                                  std::span<const ledger::QuorumCertificate> certificates) {
  if (assets.empty() || certificates.size() != assets.size())
    fail(ErrorCode::BadCertificate, "expected one certificate per asset");
  const crypto::Digest mine = key_hash();
  const asset::InvoiceRef ref{id_, invoice.invoice_id};
  Tick committed_at = 0;
  Amount sum = 0;
  for (std::size_t i = 0; i < assets.size(); ++i) {
    const asset::Asset& a = assets[i];
    if (auto report = asset::verify_asset(a, ledger_.mint_keys()); !report.valid)
      fail(ErrorCode::InvalidAsset, "asset " + a.serial_hex() + ": " + report.detail);
    const auto& last = a.history.back();
    if (last.to_key_hash != mine || last.invoice_ref != ref)
      fail(ErrorCode::WrongInvoice, "asset " + a.serial_hex() + " was not paid to this invoice");
    const auto& qc = certificates[i];
    if (!ledger::verify_certificate(qc, ledger_.validators(), ledger_.config().quorum))
      fail(ErrorCode::BadCertificate, "certificate lacks a valid quorum");
    auto entry = ledger_.find_entry(qc.entry_hash);
    if (!entry || entry->kind != ledger::EntryKind::Spend || entry->nullifier != asset::latest_nullifier(a) ||
        entry->recipient_id != id_ || entry->amount != a.denomination)
      fail(ErrorCode::BadCertificate, "certificate does not match a ledger spend of this asset");
    committed_at = std::max(committed_at, entry->tick);
    sum += a.denomination;
  }

  // From here on the assets are ours whatever happens to the invoice.
  auto keep = [&] {
    holdings_.insert(holdings_.end(), assets.begin(), assets.end());
  };
  auto known = invoices_.find(invoice.invoice_id);
  if (known == invoices_.end() || known->second != invoice || states_[invoice.invoice_id] != InvoiceState::Open) {
    keep();
    unapplied_total_ += sum;
    fail(ErrorCode::WrongInvoice, "invoice " + invoice.invoice_id + " is not open at this till");
  }
  if (sum != invoice.amount) {
    keep();
    unapplied_total_ += sum;
    fail(ErrorCode::AmountMismatch, "paid " + std::to_string(sum) + " for an invoice of " + std::to_string(invoice.amount));
  }
  if (committed_at > invoice.expiry_tick) {
    keep();
    unapplied_total_ += sum;
    fail(ErrorCode::Expired, "payment recorded after the invoice expired");
  }
  keep();
  states_[invoice.invoice_id] = InvoiceState::Paid;
  ++accepted_[invoice.invoice_id];
  std::erase(open_order_, invoice.invoice_id);
  paid_total_ += sum;
}

Amount MerchantTill::deposit(bank::IntermediaryBank& bank) {
  if (holdings_.empty()) return 0;
  const asset::InvoiceRef ref{id_, "deposit-" + std::to_string(next_deposit_)};
  std::vector<asset::Asset> outgoing;
  for (const auto& a : holdings_) outgoing.push_back(asset::append_transfer(a, bank.key_hash(), ref, key_));
  Amount credited = bank.deposit_merchant(id_, outgoing);
  ++next_deposit_;
  holdings_.clear();
  credited_total_ += credited;
  return credited;
}

InvoiceState MerchantTill::invoice_state(const std::string& invoice_id) const {
  auto it = states_.find(invoice_id);
  if (it == states_.end()) fail(ErrorCode::WrongInvoice, "unknown invoice " + invoice_id);
  return it->second;
}

std::optional<Invoice> MerchantTill::latest_open_invoice(std::optional<Amount> amount) const {
  for (auto it = open_order_.rbegin(); it != open_order_.rend(); ++it) {
    const Invoice& inv = invoices_.at(*it);
    if (!amount || inv.amount == *amount) return inv;
  }
  return std::nullopt;
}

Amount MerchantTill::unredeemed_value() const {
  Amount total = 0;
  for (const auto& a : holdings_) total += a.denomination;
  return total;
}

std::size_t MerchantTill::accepted_payments(const std::string& invoice_id) const {
  auto it = accepted_.find(invoice_id);
  return it == accepted_.end() ? 0 : it->second;
}

}  // namespace cbdc::merchant
