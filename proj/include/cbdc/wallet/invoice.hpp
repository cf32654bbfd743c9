#pragma once

#include <string>
#include <vector>

#include "cbdc/ledger/entry.hpp"

namespace cbdc::wallet {

struct Invoice {
  std::string merchant_id;
  std::string invoice_id;
  Amount amount = 0;
  Tick expiry_tick = 0;
  crypto::Digest payee_key_hash;  // where the transfer records must point

  bool operator==(const Invoice&) const = default;
};

Json invoice_to_json(const Invoice& invoice);
// Throws InvalidArgument on schema violations.
Invoice invoice_from_json(const Json& j);

struct PaymentProof {
  std::string invoice_id;
  std::vector<ledger::QuorumCertificate> certificates;
};

Json payment_proof_to_json(const PaymentProof& proof);

}  // namespace cbdc::wallet
