#include "cbdc/wallet/wallet.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "cbdc/asset/selection.hpp"

namespace cbdc::wallet {

namespace {

Json key_to_json(const crypto::SigningKeyPair& k) {
  Json j;
  j["modulus"] = crypto::to_hex(k.public_part.modulus);
  j["exponent"] = crypto::to_hex(k.public_part.exponent);
  j["secret_exponent"] = crypto::to_hex(k.secret_exponent);
  j["bits"] = k.bits;
  return j;
}

crypto::SigningKeyPair key_from_json(const Json& j) {
  crypto::SigningKeyPair k;
  k.public_part.modulus = crypto::bigint_from_hex(j.at("modulus").get<std::string>());
  k.public_part.exponent = crypto::bigint_from_hex(j.at("exponent").get<std::string>());
  k.secret_exponent = crypto::bigint_from_hex(j.at("secret_exponent").get<std::string>());
  k.bits = j.at("bits").get<unsigned>();
  return k;
}

asset::Serial serial_from_hex(const std::string& hex) {
  auto raw = crypto::from_hex(hex);
  if (raw.size() != 32) fail(ErrorCode::InvalidArgument, "serial must be 32 bytes");
  asset::Serial s{};
  std::copy(raw.begin(), raw.end(), s.begin());
  return s;
}

}  // namespace

Json balance_to_json(const WalletBalance& b) {
  Json j;
  j["total"] = b.total;
  j["spendable"] = b.spendable;
  j["hot"] = b.hot;
  j["in_flight"] = b.in_flight;
  Json per = Json::object();
  for (const auto& [d, c] : b.per_denomination) per[std::to_string(d)] = c;
  j["per_denomination"] = std::move(per);
  return j;
}

Wallet::Wallet(std::string wallet_id, std::string linked_account, crypto::RngStream rng, WalletParams params)
    : id_(std::move(wallet_id)),
      linked_account_(std::move(linked_account)),
      rng_(std::move(rng)),
      params_(std::move(params)) {}

HeldAsset* Wallet::find(const asset::Serial& serial) {
  for (auto& h : holdings_)
    if (h.asset.serial == serial) return &h;
  return nullptr;
}

std::vector<asset::Asset> Wallet::withdraw(Amount amount, WithdrawalService& bank,
                                           const asset::MintKeyDirectory& mint_keys, Tick now) {
  if (amount <= 0) fail(ErrorCode::InvalidArgument, "withdrawal amount must be positive");
  const std::vector<Amount> denoms = asset::decompose_amount(amount, params_.denominations);

  std::vector<mint::BlindItem> batch;
  pending_blinds_.clear();
  for (Amount d : denoms) {
    auto pk = mint_keys.find(d);
    if (pk == mint_keys.end()) fail(ErrorCode::UnknownDenomination, "no mint key for " + std::to_string(d));
    PendingBlind p;
    p.serial = rng_.bytes32();
    p.denomination = d;
    p.owner_key = crypto::generate_keypair(params_.key_bits, rng_);
    p.factor = crypto::draw_blinding_factor(pk->second, rng_);
    auto commitment = asset::genesis_commitment(p.serial, crypto::key_hash(p.owner_key.public_part));
    batch.push_back(mint::BlindItem{d, crypto::blind(commitment, p.factor, pk->second)});
    pending_blinds_.push_back(std::move(p));
  }

  bank::WithdrawalResult result;
  try {
    result = bank.request(linked_account_, amount, batch);
  } catch (...) {
    pending_blinds_.clear();
    throw;
  }

  std::vector<HeldAsset> fresh;
  for (std::size_t i = 0; i < pending_blinds_.size(); ++i) {
    const PendingBlind& p = pending_blinds_[i];
    const auto& pk = mint_keys.at(p.denomination);
    asset::Asset a;
    a.serial = p.serial;
    a.denomination = p.denomination;
    a.genesis_owner_hash = crypto::key_hash(p.owner_key.public_part);
    a.issue_tick = now;
    bool ok = i < result.signatures.size();
    if (ok) {
      a.genesis_signature = crypto::unblind(result.signatures[i], p.factor, pk);
      ok = crypto::verify_blind_signature(asset::genesis_commitment(a.serial, a.genesis_owner_hash),
                                          a.genesis_signature, pk);
    }
    if (!ok) {
      pending_blinds_.clear();
      bank.reverse(result.receipt.id);
      fail(ErrorCode::VerificationFailed, "mint signature " + std::to_string(i) + " does not verify; withdrawal reversed");
    }
    fresh.push_back(HeldAsset{std::move(a), p.owner_key, {}});
  }

  std::vector<asset::Asset> added;
  for (std::size_t i = 0; i < fresh.size(); ++i) {
    used_factors_.push_back(crypto::to_hex(pending_blinds_[i].factor.value));
    used_owner_hashes_.push_back(fresh[i].asset.genesis_owner_hash.hex());
    added.push_back(fresh[i].asset);
    holdings_.push_back(std::move(fresh[i]));
  }
  pending_blinds_.clear();
  total_withdrawn_ += amount;
  return added;
}

PreparedPayment Wallet::prepare_payment(const Invoice& invoice, Tick now) {
  if (invoice.amount <= 0) fail(ErrorCode::InvalidArgument, "invoice amount must be positive");
  if (now > invoice.expiry_tick)
    fail(ErrorCode::InvoiceExpired, "invoice " + invoice.invoice_id + " expired at tick " + std::to_string(invoice.expiry_tick));

  std::vector<std::size_t> free;
  std::vector<asset::Asset> candidates;
  for (std::size_t i = 0; i < holdings_.size(); ++i) {
    if (holdings_[i].in_flight()) continue;
    free.push_back(i);
    candidates.push_back(holdings_[i].asset);
  }

  std::vector<std::size_t> picked;
  try {
    picked = asset::select_token_indices(candidates, invoice.amount, now, params_.cooldown);
  } catch (const ProtocolError& e) {
    if (e.code() != ErrorCode::CannotMakeAmount) throw;
    std::vector<std::size_t> eventually;
    try {
      eventually = asset::select_token_indices(candidates, invoice.amount, now, 0);
    } catch (const ProtocolError&) {
      throw e;
    }
    Tick ready = now;
    for (std::size_t i : eventually) ready = std::max(ready, candidates[i].issue_tick + params_.cooldown);
    fail(ErrorCode::HotAsset, "funds cooling down; try at tick " + std::to_string(ready));
  }
  for (auto& i : picked) i = free[i];
  return register_payment(invoice, std::move(picked));
}

PreparedPayment Wallet::register_payment(const Invoice& invoice, std::vector<std::size_t> picked) {
  PreparedPayment prepared;
  prepared.payment_id = next_payment_id_++;
  prepared.invoice = invoice;
  Pending pending;
  pending.invoice = invoice;
  asset::InvoiceRef ref{invoice.merchant_id, invoice.invoice_id};
  for (std::size_t i : picked) {
    HeldAsset& h = holdings_[i];
    asset::Asset transferred = asset::append_transfer(h.asset, invoice.payee_key_hash, ref, h.owner_key);
    prepared.requests.push_back(ledger::SpendRequest{transferred, ref});
    pending.serials.push_back(h.asset.serial);
    pending.transferred.push_back(std::move(transferred));
    h.payments.insert(prepared.payment_id);
  }
  payments_.emplace(prepared.payment_id, std::move(pending));
  return prepared;
}

PreparedPayment Wallet::prepare_conflicting_payment(const PreparedPayment& original, const Invoice& other) {
  auto it = payments_.find(original.payment_id);
  if (it == payments_.end()) fail(ErrorCode::InvalidArgument, "unknown payment");
  std::vector<std::size_t> picked;
  for (const auto& serial : it->second.serials)
    for (std::size_t i = 0; i < holdings_.size(); ++i)
      if (holdings_[i].asset.serial == serial) picked.push_back(i);
  return register_payment(other, std::move(picked));
}

CompletedPayment Wallet::complete_payment(std::uint64_t payment_id, std::vector<ledger::QuorumCertificate> certificates) {
  auto it = payments_.find(payment_id);
  if (it == payments_.end()) fail(ErrorCode::InvalidArgument, "unknown payment");
  Pending pending = std::move(it->second);
  payments_.erase(it);

  CompletedPayment out;
  out.proof.invoice_id = pending.invoice.invoice_id;
  out.proof.certificates = std::move(certificates);
  out.transferred = std::move(pending.transferred);
  std::set<asset::Serial> gone(pending.serials.begin(), pending.serials.end());
  Amount value = 0;
  std::erase_if(holdings_, [&](const HeldAsset& h) {
    if (!gone.count(h.asset.serial)) return false;
    value += h.asset.denomination;
    return true;
  });
  // Any other payment still referencing these assets can no longer succeed.
  for (auto& [id, p] : payments_) std::erase_if(p.serials, [&](const auto& s) { return gone.count(s) > 0; });
  total_paid_ += value;
  return out;
}

void Wallet::fail_payment(std::uint64_t payment_id) {
  auto it = payments_.find(payment_id);
  if (it == payments_.end()) return;
  for (const auto& serial : it->second.serials)
    if (HeldAsset* h = find(serial)) h->payments.erase(payment_id);
  payments_.erase(it);
}

CompletedPayment Wallet::pay(const Invoice& invoice, ledger::Ledger& ledger, std::span<ledger::Validator> validators,
                             const std::function<bool(const std::string&)>& reachable) {
  PreparedPayment prepared = prepare_payment(invoice, ledger.current_tick());
  std::vector<ledger::QuorumCertificate> certs;
  try {
    certs = ledger::submit_spend(ledger, prepared.requests, validators, reachable);
  } catch (...) {
    fail_payment(prepared.payment_id);
    throw;
  }
  return complete_payment(prepared.payment_id, std::move(certs));
}

WalletBalance Wallet::balance(Tick now) const {
  WalletBalance b;
  for (const auto& h : holdings_) {
    const Amount d = h.asset.denomination;
    b.total += d;
    ++b.per_denomination[d];
    if (h.in_flight()) {
      b.in_flight += d;
      b.hot += d;
    } else if (asset::is_cooled(h.asset, now, params_.cooldown)) {
      b.spendable += d;
    } else {
      b.hot += d;
    }
  }
  return b;
}

Json Wallet::state_json() const {
  Json j;
  j["schema"] = "wallet/v1";
  j["wallet_id"] = id_;
  j["linked_account"] = linked_account_;
  Json rng;
  rng["stream_id"] = rng_.id();
  rng["engine_seed"] = rng_.engine_seed();
  rng["draws"] = rng_.draws();
  j["rng"] = std::move(rng);
  Json params;
  params["denominations"] = params_.denominations;
  params["key_bits"] = params_.key_bits;
  params["cooldown"] = params_.cooldown;
  j["params"] = std::move(params);

  Json holdings = Json::array();
  for (const auto& h : holdings_) {
    Json hj;
    hj["asset"] = asset::asset_to_json(h.asset);
    hj["owner_key"] = key_to_json(h.owner_key);
    hj["payments"] = h.payments;
    holdings.push_back(std::move(hj));
  }
  j["holdings"] = std::move(holdings);

  Json blinds = Json::array();
  for (const auto& p : pending_blinds_) {
    Json pj;
    pj["serial"] = crypto::to_hex(p.serial);
    pj["denomination"] = p.denomination;
    pj["blinding_factor"] = {{"value", crypto::to_hex(p.factor.value)},
                             {"stream_id", p.factor.stream_id},
                             {"draw_index", p.factor.draw_index}};
    pj["owner_key"] = key_to_json(p.owner_key);
    blinds.push_back(std::move(pj));
  }
  j["pending_blinds"] = std::move(blinds);

  Json payments = Json::array();
  for (const auto& [id, p] : payments_) {
    Json pj;
    pj["payment_id"] = id;
    pj["invoice"] = invoice_to_json(p.invoice);
    Json serials = Json::array();
    for (const auto& s : p.serials) serials.push_back(crypto::to_hex(s));
    pj["serials"] = std::move(serials);
    Json transferred = Json::array();
    for (const auto& a : p.transferred) transferred.push_back(asset::asset_to_json(a));
    pj["transferred"] = std::move(transferred);
    payments.push_back(std::move(pj));
  }
  j["payments"] = std::move(payments);

  j["next_payment_id"] = next_payment_id_;
  j["total_withdrawn"] = total_withdrawn_;
  j["total_paid"] = total_paid_;
  j["used_blinding_factors"] = used_factors_;
  j["used_owner_hashes"] = used_owner_hashes_;
  return j;
}

Wallet Wallet::from_json(const Json& j) {
  try {
    if (j.at("schema").get<std::string>() != "wallet/v1") fail(ErrorCode::CorruptFile, "unsupported wallet schema");
    const Json& rng = j.at("rng");
    WalletParams params;
    params.denominations = j.at("params").at("denominations").get<std::vector<Amount>>();
    params.key_bits = j.at("params").at("key_bits").get<unsigned>();
    params.cooldown = j.at("params").at("cooldown").get<Tick>();
    Wallet w(j.at("wallet_id").get<std::string>(), j.at("linked_account").get<std::string>(),
             crypto::RngStream::restore(rng.at("stream_id").get<std::string>(),
                                        rng.at("engine_seed").get<std::uint64_t>(), rng.at("draws").get<std::uint64_t>()),
             params);
    for (const auto& hj : j.at("holdings")) {
      HeldAsset h;
      h.asset = asset::asset_from_json(hj.at("asset"));
      h.owner_key = key_from_json(hj.at("owner_key"));
      h.payments = hj.at("payments").get<std::set<std::uint64_t>>();
      w.holdings_.push_back(std::move(h));
    }
    for (const auto& pj : j.at("pending_blinds")) {
      PendingBlind p;
      p.serial = serial_from_hex(pj.at("serial").get<std::string>());
      p.denomination = pj.at("denomination").get<Amount>();
      const Json& f = pj.at("blinding_factor");
      p.factor = crypto::BlindingFactor{crypto::bigint_from_hex(f.at("value").get<std::string>()),
                                        f.at("stream_id").get<std::string>(), f.at("draw_index").get<std::uint64_t>()};
      p.owner_key = key_from_json(pj.at("owner_key"));
      w.pending_blinds_.push_back(std::move(p));
    }
    for (const auto& pj : j.at("payments")) {
      Pending p;
      p.invoice = invoice_from_json(pj.at("invoice"));
      for (const auto& s : pj.at("serials")) p.serials.push_back(serial_from_hex(s.get<std::string>()));
      for (const auto& a : pj.at("transferred")) p.transferred.push_back(asset::asset_from_json(a));
      w.payments_.emplace(pj.at("payment_id").get<std::uint64_t>(), std::move(p));
    }
    w.next_payment_id_ = j.at("next_payment_id").get<std::uint64_t>();
    w.total_withdrawn_ = j.at("total_withdrawn").get<Amount>();
    w.total_paid_ = j.at("total_paid").get<Amount>();
    w.used_factors_ = j.at("used_blinding_factors").get<std::vector<std::string>>();
    w.used_owner_hashes_ = j.at("used_owner_hashes").get<std::vector<std::string>>();
    for (const auto& h : w.holdings_)
      if (crypto::key_hash(h.owner_key.public_part) != h.asset.owner_hash())
        fail(ErrorCode::CorruptFile, "held key does not control asset " + h.asset.serial_hex());
    return w;
  } catch (const Json::exception& ex) {
    fail(ErrorCode::CorruptFile, std::string("wallet file: ") + ex.what());
  } catch (const ProtocolError& ex) {
    if (ex.code() == ErrorCode::CorruptFile) throw;
    fail(ErrorCode::CorruptFile, std::string("wallet file: ") + ex.what());
  }
}

void Wallet::persist(const std::filesystem::path& path) const {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::trunc);
    if (!out) fail(ErrorCode::InvalidArgument, "cannot write " + tmp.string());
    out << state_json().dump() << '\n';
  }
  std::filesystem::rename(tmp, path);
}

Wallet Wallet::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::CorruptFile, "cannot open " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  Json j;
  try {
    j = Json::parse(buf.str());
  } catch (const Json::exception& ex) {
    fail(ErrorCode::CorruptFile, std::string("wallet file: ") + ex.what());
  }
  return from_json(j);
}

}  // namespace cbdc::wallet
