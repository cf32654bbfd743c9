#include "cbdc/asset/asset.hpp"

#include "cbdc/error.hpp"

namespace cbdc::asset {

std::string Asset::serial_hex() const { return crypto::to_hex(serial); }

Digest genesis_commitment(std::span<const std::uint8_t> serial, const Digest& owner_key_hash) {
  if (serial.size() != 32) fail(ErrorCode::MalformedSerial, "serial must be 32 bytes");
  return crypto::Sha256().update(serial).update(owner_key_hash).finish();
}

Digest transfer_message(const Serial& serial, std::uint64_t index, const Digest& to_key_hash,
                        const std::optional<InvoiceRef>& invoice_ref) {
  crypto::Sha256 h;
  h.update(std::span<const std::uint8_t>(serial)).update_u64(index).update(to_key_hash);
  if (invoice_ref) {
    h.update_u64(1);
    h.update_u64(invoice_ref->merchant_id.size()).update(invoice_ref->merchant_id);
    h.update_u64(invoice_ref->invoice_id.size()).update(invoice_ref->invoice_id);
  } else {
    h.update_u64(0);
  }
  return h.finish();
}

std::string_view check_name(Check check) {
  switch (check) {
    case Check::GenesisSignature: return "genesis-signature";
    case Check::IndexGap: return "index-gap";
    case Check::ChainLinkage: return "chain-linkage";
    case Check::RecordSignature: return "record-signature";
  }
  return "unknown";
}

namespace {

VerificationReport failure(Check check, std::string detail) {
  return VerificationReport{false, check, std::move(detail)};
}

}  // namespace

VerificationReport verify_history(const Asset& asset) {
  const Digest* owner = &asset.genesis_owner_hash;
  for (std::size_t i = 0; i < asset.history.size(); ++i) {
    const TransferRecord& rec = asset.history[i];
    if (rec.index != i)
      return failure(Check::IndexGap, "record " + std::to_string(i) + " has index " + std::to_string(rec.index));
    if (crypto::key_hash(rec.from_public_key) != *owner)
      return failure(Check::ChainLinkage, "record " + std::to_string(i) + " not signed by the previous owner");
    Digest msg = transfer_message(asset.serial, rec.index, rec.to_key_hash, rec.invoice_ref);
    if (!crypto::verify_signature(msg, rec.signature, rec.from_public_key))
      return failure(Check::RecordSignature, "record " + std::to_string(i) + " signature invalid");
    owner = &rec.to_key_hash;
  }
  return {};
}

VerificationReport verify_asset(const Asset& asset, const MintKeyDirectory& mint_keys) {
  auto key = mint_keys.find(asset.denomination);
  if (key == mint_keys.end())
    return failure(Check::GenesisSignature, "no mint key for denomination " + std::to_string(asset.denomination));
  Digest commitment = genesis_commitment(asset.serial, asset.genesis_owner_hash);
  if (!crypto::verify_blind_signature(commitment, asset.genesis_signature, key->second))
    return failure(Check::GenesisSignature, "mint signature does not verify");
  return verify_history(asset);
}

Asset append_transfer(const Asset& asset, const Digest& to_key_hash,
                      const std::optional<InvoiceRef>& invoice_ref,
                      const crypto::SigningKeyPair& owner_key) {
  if (auto report = verify_history(asset); !report.valid)
    fail(ErrorCode::UnverifiableAsset, report.detail);
  if (crypto::key_hash(owner_key.public_part) != asset.owner_hash())
    fail(ErrorCode::WrongOwnerKey, "key does not control asset " + asset.serial_hex());
  Asset out = asset;
  TransferRecord rec;
  rec.index = asset.history.size();
  rec.from_public_key = owner_key.public_part;
  rec.to_key_hash = to_key_hash;
  rec.invoice_ref = invoice_ref;
  rec.signature = crypto::sign(transfer_message(asset.serial, rec.index, to_key_hash, invoice_ref), owner_key);
  out.history.push_back(std::move(rec));
  return out;
}

Nullifier nullifier(const Serial& serial, std::uint64_t index) {
  return Nullifier{crypto::Sha256().update(std::span<const std::uint8_t>(serial)).update_u64(index).finish()};
}

Nullifier latest_nullifier(const Asset& asset) {
  if (asset.history.empty()) fail(ErrorCode::InvalidAsset, "asset has no transfers");
  return nullifier(asset.serial, asset.history.back().index);
}

}  // namespace cbdc::asset
