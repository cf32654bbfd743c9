#include "cbdc/asset/codec.hpp"

#include "cbdc/error.hpp"

namespace cbdc::asset {

namespace {

const Json& field(const Json& j, const char* name) {
  if (!j.is_object() || !j.contains(name)) fail(ErrorCode::InvalidArgument, std::string("missing field ") + name);
  return j.at(name);
}

std::string string_field(const Json& j, const char* name) {
  const Json& v = field(j, name);
  if (!v.is_string()) fail(ErrorCode::InvalidArgument, std::string("field ") + name + " must be a string");
  return v.get<std::string>();
}

std::int64_t int_field(const Json& j, const char* name) {
  const Json& v = field(j, name);
  if (!v.is_number_integer()) fail(ErrorCode::InvalidArgument, std::string("field ") + name + " must be an integer");
  return v.get<std::int64_t>();
}

}  // namespace

Json public_key_to_json(const PublicKey& pk) {
  Json j;
  j["modulus"] = crypto::to_hex(pk.modulus);
  j["exponent"] = crypto::to_hex(pk.exponent);
  return j;
}

PublicKey public_key_from_json(const Json& j) {
  return PublicKey{crypto::bigint_from_hex(string_field(j, "modulus")),
                   crypto::bigint_from_hex(string_field(j, "exponent"))};
}

Json invoice_ref_to_json(const std::optional<InvoiceRef>& ref) {
  if (!ref) return nullptr;
  Json j;
  j["merchant_id"] = ref->merchant_id;
  j["invoice_id"] = ref->invoice_id;
  return j;
}

std::optional<InvoiceRef> invoice_ref_from_json(const Json& j) {
  if (j.is_null()) return std::nullopt;
  return InvoiceRef{string_field(j, "merchant_id"), string_field(j, "invoice_id")};
}

Json asset_to_json(const Asset& asset) {
  Json j;
  j["serial"] = asset.serial_hex();
  j["denomination"] = asset.denomination;
  j["genesis_owner_hash"] = asset.genesis_owner_hash.hex();
  j["genesis_signature"] = crypto::to_hex(asset.genesis_signature);
  j["issue_tick"] = asset.issue_tick;
  Json history = Json::array();
  for (const auto& rec : asset.history) {
    Json r;
    r["index"] = rec.index;
    r["from_public_key"] = public_key_to_json(rec.from_public_key);
    r["to_key_hash"] = rec.to_key_hash.hex();
    r["invoice_ref"] = invoice_ref_to_json(rec.invoice_ref);
    r["signature"] = crypto::to_hex(rec.signature.value);
    history.push_back(std::move(r));
  }
  j["history"] = std::move(history);
  return j;
}

Asset asset_from_json(const Json& j) {
  Asset a;
  auto serial = crypto::from_hex(string_field(j, "serial"));
  if (serial.size() != a.serial.size()) fail(ErrorCode::InvalidArgument, "serial must be 32 bytes");
  std::copy(serial.begin(), serial.end(), a.serial.begin());
  a.denomination = int_field(j, "denomination");
  a.genesis_owner_hash = Digest::from_hex(string_field(j, "genesis_owner_hash"));
  a.genesis_signature = crypto::bigint_from_hex(string_field(j, "genesis_signature"));
  a.issue_tick = int_field(j, "issue_tick");
  const Json& history = field(j, "history");
  if (!history.is_array()) fail(ErrorCode::InvalidArgument, "history must be an array");
  for (const auto& r : history) {
    TransferRecord rec;
    std::int64_t index = int_field(r, "index");
    if (index < 0) fail(ErrorCode::InvalidArgument, "negative transfer index");
    rec.index = static_cast<std::uint64_t>(index);
    rec.from_public_key = public_key_from_json(field(r, "from_public_key"));
    rec.to_key_hash = Digest::from_hex(string_field(r, "to_key_hash"));
    rec.invoice_ref = invoice_ref_from_json(field(r, "invoice_ref"));
    rec.signature.value = crypto::bigint_from_hex(string_field(r, "signature"));
    a.history.push_back(std::move(rec));
  }
  return a;
}

std::string canonical_asset(const Asset& asset) { return asset_to_json(asset).dump(); }

}  // namespace cbdc::asset
