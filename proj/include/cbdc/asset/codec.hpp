#pragma once

#include <string>

#include "json.hpp"

#include "cbdc/asset/asset.hpp"

namespace cbdc {

// Insertion-ordered JSON: field order is part of every canonical encoding.
using Json = nlohmann::ordered_json;

}  // namespace cbdc

namespace cbdc::asset {

Json public_key_to_json(const PublicKey& pk);
PublicKey public_key_from_json(const Json& j);

Json invoice_ref_to_json(const std::optional<InvoiceRef>& ref);
std::optional<InvoiceRef> invoice_ref_from_json(const Json& j);

// Fixed field order: serial, denomination, genesis_owner_hash,
// genesis_signature, issue_tick, history. Binary fields are hex.
Json asset_to_json(const Asset& asset);
// Throws InvalidArgument on any schema violation.
Asset asset_from_json(const Json& j);

std::string canonical_asset(const Asset& asset);

}  // namespace cbdc::asset
