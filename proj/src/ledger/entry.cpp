#include "cbdc/ledger/entry.hpp"

#include <set>

#include "cbdc/error.hpp"

namespace cbdc::ledger {

std::string_view entry_kind_name(EntryKind kind) {
  switch (kind) {
    case EntryKind::IssueBatch: return "IssueBatch";
    case EntryKind::Spend: return "Spend";
    case EntryKind::Redemption: return "Redemption";
  }
  return "?";
}

EntryKind entry_kind_from_name(std::string_view name) {
  if (name == "IssueBatch") return EntryKind::IssueBatch;
  if (name == "Spend") return EntryKind::Spend;
  if (name == "Redemption") return EntryKind::Redemption;
  fail(ErrorCode::InvalidArgument, "unknown entry kind " + std::string(name));
}

namespace {

Json body(const LedgerEntry& e) {
  Json j;
  j["kind"] = entry_kind_name(e.kind);
  j["nullifier"] = e.nullifier ? Json(e.nullifier->value.hex()) : Json(nullptr);
  j["recipient_id"] = e.recipient_id;
  j["amount"] = e.amount;
  j["tick"] = e.tick;
  j["prev_hash"] = e.prev_hash.hex();
  return j;
}

}  // namespace

Digest compute_entry_hash(const LedgerEntry& entry) { return crypto::sha256(body(entry).dump()); }

Json entry_to_json(const LedgerEntry& entry) {
  Json j = body(entry);
  j["entry_hash"] = entry.entry_hash.hex();
  return j;
}

LedgerEntry entry_from_json(const Json& j) {
  try {
    LedgerEntry e;
    e.kind = entry_kind_from_name(j.at("kind").get<std::string>());
    if (!j.at("nullifier").is_null()) e.nullifier = Nullifier{Digest::from_hex(j.at("nullifier").get<std::string>())};
    e.recipient_id = j.at("recipient_id").get<std::string>();
    e.amount = j.at("amount").get<Amount>();
    e.tick = j.at("tick").get<Tick>();
    e.prev_hash = Digest::from_hex(j.at("prev_hash").get<std::string>());
    e.entry_hash = Digest::from_hex(j.at("entry_hash").get<std::string>());
    return e;
  } catch (const Json::exception& ex) {
    fail(ErrorCode::InvalidArgument, std::string("malformed ledger entry: ") + ex.what());
  }
}

Json certificate_to_json(const QuorumCertificate& qc) {
  Json j;
  j["entry_hash"] = qc.entry_hash.hex();
  Json acks = Json::array();
  for (const auto& a : qc.acks) {
    Json aj;
    aj["validator_id"] = a.validator_id;
    aj["signature"] = crypto::to_hex(a.signature.value);
    acks.push_back(std::move(aj));
  }
  j["acks"] = std::move(acks);
  return j;
}

QuorumCertificate certificate_from_json(const Json& j) {
  try {
    QuorumCertificate qc;
    qc.entry_hash = Digest::from_hex(j.at("entry_hash").get<std::string>());
    for (const auto& a : j.at("acks"))
      qc.acks.push_back(Ack{a.at("validator_id").get<std::string>(),
                            crypto::Signature{crypto::bigint_from_hex(a.at("signature").get<std::string>())}});
    return qc;
  } catch (const Json::exception& ex) {
    fail(ErrorCode::InvalidArgument, std::string("malformed certificate: ") + ex.what());
  }
}

bool verify_certificate(const QuorumCertificate& qc, const ValidatorDirectory& validators, std::size_t quorum) {
  std::set<std::string> good;
  for (const auto& ack : qc.acks) {
    auto it = validators.find(ack.validator_id);
    if (it == validators.end()) continue;
    if (crypto::verify_signature(qc.entry_hash, ack.signature, it->second)) good.insert(ack.validator_id);
  }
  return good.size() >= quorum;
}

Json spend_request_to_json(const SpendRequest& req) {
  Json j;
  j["asset"] = asset::asset_to_json(req.asset);
  j["invoice_ref"] = asset::invoice_ref_to_json(req.invoice_ref);
  return j;
}

}  // namespace cbdc::ledger
