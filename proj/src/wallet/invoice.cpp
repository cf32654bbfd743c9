#include "cbdc/wallet/invoice.hpp"

#include "cbdc/error.hpp"

namespace cbdc::wallet {

Json invoice_to_json(const Invoice& invoice) {
  Json j;
  j["merchant_id"] = invoice.merchant_id;
  j["invoice_id"] = invoice.invoice_id;
  j["amount"] = invoice.amount;
  j["expiry_tick"] = invoice.expiry_tick;
  j["payee_key_hash"] = invoice.payee_key_hash.hex();
  return j;
}

Invoice invoice_from_json(const Json& j) {
  try {
    return Invoice{j.at("merchant_id").get<std::string>(), j.at("invoice_id").get<std::string>(),
                   j.at("amount").get<Amount>(), j.at("expiry_tick").get<Tick>(),
                   crypto::Digest::from_hex(j.at("payee_key_hash").get<std::string>())};
  } catch (const Json::exception& ex) {
    fail(ErrorCode::InvalidArgument, std::string("malformed invoice: ") + ex.what());
  }
}

Json payment_proof_to_json(const PaymentProof& proof) {
  Json j;
  j["invoice_id"] = proof.invoice_id;
  Json certs = Json::array();
  for (const auto& qc : proof.certificates) certs.push_back(ledger::certificate_to_json(qc));
  j["certificates"] = std::move(certs);
  return j;
}

}  // namespace cbdc::wallet
