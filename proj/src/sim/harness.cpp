#include "cbdc/sim/harness.hpp"

#include <algorithm>
#include <fstream>
#include <unordered_set>

namespace cbdc::sim {
namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

const std::string kSequencer = "sequencer";

struct AckReply {
  ledger::ProposalId proposal = 0;
  std::uint64_t round = 0;
  std::string validator;
  std::vector<ledger::Ack> acks;
};

// Hands the wallet a broken signature, as a faulty or malicious mint would.
class CorruptingService : public wallet::WithdrawalService {
 public:
  explicit CorruptingService(bank::IntermediaryBank& bank) : inner_(bank) {}
  bank::WithdrawalResult request(const std::string& account_id, Amount amount,
                                 std::span<const mint::BlindItem> batch) override {
    auto result = inner_.request(account_id, amount, batch);
    if (!result.signatures.empty()) result.signatures.front() += 1;
    return result;
  }
  void reverse(std::uint64_t receipt_id) override { inner_.reverse(receipt_id); }

 private:
  wallet::BankWithdrawalService inner_;
};

Amount amount_param(const Json& params) {
  if (!params.contains("amount") || !params.at("amount").is_number_integer())
    fail(ErrorCode::InvalidArgument, "an integer 'amount' is required");
  return params.at("amount").get<Amount>();
}

std::string string_param(const Json& params, const char* key) {
  if (!params.contains(key) || !params.at(key).is_string())
    fail(ErrorCode::InvalidArgument, std::string("a string '") + key + "' is required");
  return params.at(key).get<std::string>();
}

std::string in_quotes(const std::string& s) { return "\"" + s + "\""; }

void keep_first(std::vector<std::string>& list, std::string item) {
  if (list.size() < 10) list.push_back(std::move(item));
}

}  // namespace

struct Harness::WalletActor {
  std::string id;
  std::size_t index = 0;
  std::size_t bank = 0;
  std::unique_ptr<wallet::Wallet> wallet;
};

struct Harness::MerchantActor {
  std::string id;
  std::size_t bank = 0;
  std::unique_ptr<merchant::MerchantTill> till;
};

struct Harness::ActiveFault {
  std::string kind;
  std::set<std::string> validators;
  double rate = 0.0;
  Tick from = 0;
  std::optional<Tick> to;

  bool covers(Tick t) const { return t >= from && (!to || t < *to); }
};

struct Harness::PendingPay {
  std::size_t wallet = 0;
  std::uint64_t payment_id = 0;
  wallet::Invoice invoice;
  std::vector<ledger::SpendRequest> requests;
  std::optional<std::size_t> group;
  bool awaited = false;
};

struct Harness::DoubleSpend {
  std::int64_t accepted = 0;
  std::int64_t already_spent = 0;
  std::int64_t other = 0;
};

struct Harness::Message {
  std::string from;
  std::string to;
  std::variant<ledger::AckRequest, AckReply, ledger::CommitNotice> body;
};

Harness::Harness(ScenarioConfig config) : config_(std::move(config)), network_rng_(config_.seed, "network") {
  validate(config_);
  const std::uint64_t seed = config_.seed;

  ledger::ValidatorDirectory directory;
  for (std::size_t i = 0; i < config_.validators; ++i) {
    const std::string id = "v" + std::to_string(i);
    crypto::RngStream rng(seed, "validator/" + id);
    validators_.emplace_back(id, crypto::generate_keypair(config_.key_bits, rng));
    directory[id] = validators_.back().public_key();
  }

  crypto::RngStream mint_rng(seed, "mint");
  auto keys = mint::generate_denomination_keys(config_.denominations, config_.key_bits, mint_rng);
  ledger_ = std::make_unique<ledger::Ledger>(
      ledger::LedgerConfig{config_.quorum, config_.cooldown_ticks, config_.quorum_timeout_ticks},
      mint::public_directory(keys), std::move(directory));
  mint_ = std::make_unique<mint::MintAuthority>(std::move(keys), *ledger_);

  for (std::size_t i = 0; i < config_.banks; ++i) {
    const std::string id = "b" + std::to_string(i);
    crypto::RngStream rng(seed, "bank/" + id);
    banks_.push_back(
        std::make_unique<bank::IntermediaryBank>(id, crypto::generate_keypair(config_.key_bits, rng), *mint_, *ledger_));
    mint_->register_bank(id, banks_.back()->public_key());
  }

  wallet::WalletParams params;
  params.denominations = config_.denominations;
  params.key_bits = config_.key_bits;
  params.cooldown = config_.cooldown_ticks;
  for (std::size_t i = 0; i < config_.wallet_balances.size(); ++i) {
    auto w = std::make_unique<WalletActor>();
    w->id = "w" + std::to_string(i);
    w->index = i;
    w->bank = i % banks_.size();
    const Amount opening = config_.wallet_balances[i];
    std::string account = banks_[w->bank]->open_account(bank::HolderKind::Consumer, "Holder of " + w->id, opening);
    w->wallet = std::make_unique<wallet::Wallet>(w->id, std::move(account), crypto::RngStream(seed, "wallet/" + w->id),
                                                 params);
    initial_fiat_ += opening;
    wallets_.push_back(std::move(w));
  }

  for (std::size_t i = 0; i < config_.merchants; ++i) {
    auto m = std::make_unique<MerchantActor>();
    m->id = "m" + std::to_string(i);
    m->bank = i % banks_.size();
    std::string account = banks_[m->bank]->open_account(bank::HolderKind::Merchant, "Merchant " + m->id + " Ltd", 0);
    crypto::RngStream rng(seed, "merchant/" + m->id);
    m->till = std::make_unique<merchant::MerchantTill>(std::move(account), crypto::generate_keypair(config_.key_bits, rng),
                                                       *ledger_, config_.invoice_ttl_ticks);
    merchants_.push_back(std::move(m));
  }

  for (const auto& f : config_.faults) inject_fault(f.kind, f.params, f.from_tick, f.to_tick);
  for (const auto& e : config_.script) schedule(e.tick, e);
  process_due();
  audit_tick();
}

Harness::~Harness() = default;

Tick Harness::now() const { return ledger_->current_tick(); }

Tick Harness::step(Tick ticks) {
  if (ticks < 0) fail(ErrorCode::InvalidArgument, "cannot step backwards");
  for (Tick i = 0; i < ticks; ++i) {
    ledger_->tick();
    process_due();
    audit_tick();
  }
  return now();
}

void Harness::run() {
  const Tick horizon = config_.horizon();
  while (now() < horizon && !idle()) step(1);
}

bool Harness::idle() const {
  return queue_.empty() && !ledger_->has_active_proposal() && ledger_->queued_proposals() == 0;
}

void Harness::inject_fault(const std::string& kind, const Json& params, Tick from_tick, std::optional<Tick> to_tick) {
  if (!is_fault_kind(kind)) fail(ErrorCode::UnknownFaultKind, "unknown fault kind '" + kind + "'");
  if (to_tick && *to_tick < from_tick) fail(ErrorCode::ConfigInvalid, "fault window ends before it starts");
  const Json p = params.is_null() ? Json::object() : params;
  if (!p.is_object()) fail(ErrorCode::ConfigInvalid, "fault params must be an object");

  ActiveFault f;
  f.kind = kind;
  f.from = from_tick;
  f.to = to_tick;
  if (kind == "validator-crash" || kind == "partition") {
    if (p.contains("validators") && p.at("validators").is_array()) {
      for (const Json& v : p.at("validators")) {
        const std::string id = v.is_string() ? v.get<std::string>() : "";
        const bool known = std::any_of(validators_.begin(), validators_.end(),
                                       [&](const ledger::Validator& x) { return x.id() == id; });
        if (!known) fail(ErrorCode::ConfigInvalid, kind + ": unknown validator '" + id + "'");
        f.validators.insert(id);
      }
    } else if (p.contains("count") && p.at("count").is_number_integer() && p.at("count").get<std::int64_t>() >= 0) {
      const auto n = p.at("count").get<std::size_t>();
      if (n > validators_.size()) fail(ErrorCode::ConfigInvalid, kind + ": count exceeds validator count");
      for (std::size_t i = validators_.size() - n; i < validators_.size(); ++i) f.validators.insert(validators_[i].id());
    } else {
      fail(ErrorCode::ConfigInvalid, kind + " needs 'validators' or 'count'");
    }
  } else if (kind == "drop-spike") {
    f.rate = p.contains("rate") && p.at("rate").is_number() ? p.at("rate").get<double>() : 1.0;
    if (!(f.rate >= 0.0 && f.rate <= 1.0)) fail(ErrorCode::ConfigInvalid, "drop-spike rate must be in [0, 1]");
  }
  faults_.push_back(std::move(f));
  count("faults_injected");
}

bool Harness::crashed(const std::string& validator, Tick t) const {
  return std::any_of(faults_.begin(), faults_.end(), [&](const ActiveFault& f) {
    return f.kind == "validator-crash" && f.covers(t) && f.validators.count(validator);
  });
}

bool Harness::partitioned(const std::string& a, const std::string& b, Tick t) const {
  return std::any_of(faults_.begin(), faults_.end(), [&](const ActiveFault& f) {
    return f.kind == "partition" && f.covers(t) && (f.validators.count(a) || f.validators.count(b));
  });
}

double Harness::drop_rate(Tick t) const {
  double rate = config_.drop_rate;
  for (const auto& f : faults_)
    if (f.kind == "drop-spike" && f.covers(t)) rate = std::max(rate, f.rate);
  return rate;
}

bool Harness::mint_corrupt(Tick t) const {
  return std::any_of(faults_.begin(), faults_.end(),
                     [&](const ActiveFault& f) { return f.kind == "mint-corrupt" && f.covers(t); });
}

// ---- actors ----------------------------------------------------------------

Harness::WalletActor& Harness::wallet_actor(const std::string& id) {
  for (auto& w : wallets_)
    if (w->id == id) return *w;
  fail(ErrorCode::UnknownActor, "no wallet '" + id + "'");
}

Harness::MerchantActor& Harness::merchant_actor(const std::string& id) {
  for (auto& m : merchants_)
    if (m->id == id) return *m;
  fail(ErrorCode::UnknownActor, "no merchant '" + id + "'");
}

Harness::MerchantActor* Harness::merchant_by_account(const std::string& account_id) {
  for (auto& m : merchants_)
    if (m->till->id() == account_id) return m.get();
  return nullptr;
}

const wallet::Wallet& Harness::wallet(const std::string& id) const {
  return *const_cast<Harness*>(this)->wallet_actor(id).wallet;
}

const merchant::MerchantTill& Harness::merchant(const std::string& id) const {
  return *const_cast<Harness*>(this)->merchant_actor(id).till;
}

const bank::IntermediaryBank& Harness::bank(const std::string& id) const {
  for (const auto& b : banks_)
    if (b->id() == id) return *b;
  fail(ErrorCode::UnknownActor, "no bank '" + id + "'");
}

std::vector<std::string> Harness::wallet_ids() const {
  std::vector<std::string> out;
  for (const auto& w : wallets_) out.push_back(w->id);
  return out;
}

std::vector<std::string> Harness::merchant_ids() const {
  std::vector<std::string> out;
  for (const auto& m : merchants_) out.push_back(m->id);
  return out;
}

// ---- actions ---------------------------------------------------------------

Json Harness::perform(const std::string& actor, const std::string& action, const Json& params_in) {
  const Json params = params_in.is_null() ? Json::object() : params_in;
  count("action/" + action);
  try {
    if (!params.is_object()) fail(ErrorCode::InvalidArgument, "params must be an object");
    Json out;
    if (actor == "sim") {
      if (action != "fault") fail(ErrorCode::InvalidArgument, "sim has no action '" + action + "'");
      out = do_fault(params);
    } else if (!actor.empty() && actor[0] == 'w') {
      WalletActor& w = wallet_actor(actor);
      if (action == "withdraw") out = do_withdraw(w, params);
      else if (action == "pay") out = do_pay(w, params);
      else if (action == "double_pay") out = do_double_pay(w, params);
      else fail(ErrorCode::InvalidArgument, "wallets have no action '" + action + "'");
    } else if (!actor.empty() && actor[0] == 'm') {
      MerchantActor& m = merchant_actor(actor);
      if (action == "invoice") out = do_invoice(m, params);
      else if (action == "deposit") out = do_deposit(m);
      else fail(ErrorCode::InvalidArgument, "merchants have no action '" + action + "'");
    } else {
      fail(ErrorCode::UnknownActor, "unknown actor '" + actor + "'");
    }
    audit_tick();
    return out;
  } catch (const ProtocolError& e) {
    tally(e.code_name());
    audit_tick();
    throw;
  }
}

Json Harness::do_withdraw(WalletActor& w, const Json& params) {
  const Amount amount = amount_param(params);
  bank::IntermediaryBank& bank = *banks_[w.bank];
  std::vector<asset::Asset> added;
  if (mint_corrupt(now())) {
    CorruptingService service(bank);
    added = w.wallet->withdraw(amount, service, mint_->public_keys(), now());
  } else {
    wallet::BankWithdrawalService service(bank);
    added = w.wallet->withdraw(amount, service, mint_->public_keys(), now());
  }
  count("withdrawals");
  Json denoms = Json::array();
  for (const auto& a : added) {
    issued_at_[a.serial_hex()] = now();
    revealed_.push_back(a.serial_hex());
    revealed_.push_back(a.genesis_owner_hash.hex());
    revealed_.push_back(crypto::to_hex(a.genesis_signature));
    denoms.push_back(a.denomination);
  }
  return Json{{"wallet", w.id},
              {"amount", amount},
              {"added", std::move(denoms)},
              {"balance", wallet::balance_to_json(w.wallet->balance(now()))}};
}

Json Harness::do_invoice(MerchantActor& m, const Json& params) {
  auto invoice = m.till->create_invoice(amount_param(params), now());
  count("invoices");
  return wallet::invoice_to_json(invoice);
}

wallet::Invoice Harness::resolve_invoice(const Json& params) {
  if (params.contains("invoice") && params.at("invoice").is_object()) {
    wallet::Invoice claimed = wallet::invoice_from_json(params.at("invoice"));
    MerchantActor* m = merchant_by_account(claimed.merchant_id);
    if (!m) fail(ErrorCode::WrongInvoice, "no merchant '" + claimed.merchant_id + "'");
    auto it = m->till->invoices().find(claimed.invoice_id);
    if (it == m->till->invoices().end() || !(it->second == claimed))
      fail(ErrorCode::WrongInvoice, "invoice " + claimed.invoice_id + " was not issued by " + claimed.merchant_id);
    return it->second;
  }
  if (params.contains("invoice_id") || (params.contains("invoice") && params.at("invoice").is_string())) {
    const std::string id = params.contains("invoice_id") ? string_param(params, "invoice_id")
                                                         : params.at("invoice").get<std::string>();
    for (const auto& m : merchants_) {
      auto it = m->till->invoices().find(id);
      if (it != m->till->invoices().end()) return it->second;
    }
    fail(ErrorCode::WrongInvoice, "no invoice '" + id + "'");
  }
  if (params.contains("merchant")) {
    MerchantActor& m = merchant_actor(string_param(params, "merchant"));
    auto latest = m.till->latest_open_invoice();
    if (!latest) fail(ErrorCode::WrongInvoice, "merchant " + m.id + " has no open invoice");
    return *latest;
  }
  fail(ErrorCode::InvalidArgument, "pay needs 'invoice', 'invoice_id' or 'merchant'");
}

ledger::ProposalId Harness::submit(WalletActor& w, const wallet::PreparedPayment& p, std::optional<std::size_t> group) {
  for (const auto& req : p.requests) payflow_capture_ += ledger::spend_request_to_json(req).dump() + "\n";
  ledger::ProposalId id = 0;
  try {
    id = ledger_->submit_spend_batch(p.requests);
  } catch (const ProtocolError&) {
    w.wallet->fail_payment(p.payment_id);
    throw;
  }
  pending_[id] = PendingPay{w.index, p.payment_id, p.invoice, p.requests, group, false};
  count("spend_batches_submitted");
  return id;
}

Json Harness::do_pay(WalletActor& w, const Json& params) {
  const wallet::Invoice invoice = resolve_invoice(params);
  const auto prepared = w.wallet->prepare_payment(invoice, now());
  const ledger::ProposalId id = submit(w, prepared, std::nullopt);
  pending_.at(id).awaited = true;
  pump();
  settle();
  auto it = resolved_.find(id);
  if (it == resolved_.end()) {
    pending_.at(id).awaited = false;
    return Json{{"status", "pending"}, {"invoice_id", invoice.invoice_id}};
  }
  auto [error, body] = std::move(it->second);
  resolved_.erase(it);
  if (error) fail(*error, "payment for " + invoice.invoice_id + " failed");
  return body;
}

Json Harness::do_double_pay(WalletActor& w, const Json& params) {
  if (!params.contains("merchants") || !params.at("merchants").is_array() || params.at("merchants").size() != 2)
    fail(ErrorCode::InvalidArgument, "double_pay needs two merchants");
  std::optional<Amount> amount;
  if (params.contains("amount")) amount = amount_param(params);
  std::vector<wallet::Invoice> invoices;
  for (const Json& name : params.at("merchants")) {
    if (!name.is_string()) fail(ErrorCode::InvalidArgument, "merchant ids must be strings");
    MerchantActor& m = merchant_actor(name.get<std::string>());
    auto inv = m.till->latest_open_invoice(amount);
    if (!inv) fail(ErrorCode::WrongInvoice, "merchant " + m.id + " has no matching open invoice");
    invoices.push_back(*inv);
  }
  if (invoices[0].amount != invoices[1].amount) fail(ErrorCode::InvalidArgument, "double_pay needs equal amounts");

  const auto first = w.wallet->prepare_payment(invoices[0], now());
  const auto second = w.wallet->prepare_conflicting_payment(first, invoices[1]);
  double_spends_.emplace_back();
  const std::size_t group = double_spends_.size() - 1;
  try {
    submit(w, first, group);
  } catch (const ProtocolError&) {
    w.wallet->fail_payment(second.payment_id);
    double_spends_.pop_back();
    throw;
  }
  count("double_spend_attempts");
  std::string second_status = "submitted";
  try {
    submit(w, second, group);
  } catch (const ProtocolError& e) {
    tally(e.code_name());
    second_status = e.code_name();
    if (e.code() == ErrorCode::AlreadySpent) ++double_spends_[group].already_spent;
    else ++double_spends_[group].other;
  }
  pump();
  settle();
  return Json{{"first_invoice", invoices[0].invoice_id},
              {"second_invoice", invoices[1].invoice_id},
              {"second", second_status}};
}

Json Harness::do_deposit(MerchantActor& m) {
  const Amount credited = m.till->deposit(*banks_[m.bank]);
  count("deposits");
  return Json{{"merchant", m.id}, {"credited", credited}};
}

Json Harness::do_fault(const Json& params) {
  const std::string kind = string_param(params, "kind");
  const Json p = params.contains("params") ? params.at("params") : Json::object();
  const Tick from = params.contains("from_tick") ? params.at("from_tick").get<Tick>() : now();
  std::optional<Tick> to;
  if (params.contains("to_tick")) to = params.at("to_tick").get<Tick>();
  inject_fault(kind, p, from, to);
  return Json{{"kind", kind}, {"from_tick", from}};
}

// ---- event loop ------------------------------------------------------------

std::pair<Tick, std::uint64_t> Harness::schedule(Tick at, Event e) {
  std::pair<Tick, std::uint64_t> key{at, next_seq_++};
  queue_.emplace(key, std::move(e));
  return key;
}

void Harness::process_due() {
  while (!queue_.empty() && queue_.begin()->first.first <= now()) {
    auto node = queue_.extract(queue_.begin());
    handle(node.mapped());
    pump();
  }
}

// Delivers traffic already due without running other scripted actions, so an
// action's same-tick consequences settle before the next action starts.
void Harness::settle() {
  for (;;) {
    auto it = queue_.begin();
    while (it != queue_.end() && it->first.first <= now() && std::holds_alternative<ScriptEvent>(it->second)) ++it;
    if (it == queue_.end() || it->first.first > now()) return;
    auto node = queue_.extract(it);
    handle(node.mapped());
    pump();
  }
}

void Harness::handle(const Event& e) {
  std::visit(overloaded{
                 [&](const ScriptEvent& s) {
                   count("script_events");
                   try {
                     perform(s.actor, s.action, s.params);
                   } catch (const ProtocolError&) {
                     // tallied by perform
                   }
                 },
                 [&](const std::shared_ptr<Message>& m) { deliver(*m); },
                 [&](const Deadline& d) {
                   deadlines_.erase(d.proposal);
                   count("deadlines_reached");
                   ledger_->on_deadline(d.proposal);
                 },
             },
             e);
}

void Harness::send(const std::string& from, const std::string& to, std::shared_ptr<Message> m) {
  count("messages_sent");
  const Tick t = now();
  if (partitioned(from, to, t) || network_rng_.bernoulli(drop_rate(t))) {
    count("messages_dropped");
    return;
  }
  const Tick latency = config_.latency.min == config_.latency.max
                           ? config_.latency.min
                           : static_cast<Tick>(network_rng_.uniform(static_cast<std::uint64_t>(config_.latency.min),
                                                                    static_cast<std::uint64_t>(config_.latency.max)));
  m->from = from;
  m->to = to;
  schedule(t + latency, std::move(m));
}

void Harness::deliver(const Message& m) {
  ledger::Validator* target = nullptr;
  for (auto& v : validators_)
    if (v.id() == m.to) target = &v;
  if (target && crashed(target->id(), now())) {
    count("messages_lost_to_crash");
    return;
  }
  count("messages_delivered");
  std::visit(overloaded{
                 [&](const ledger::AckRequest& req) {
                   auto acks = target->acknowledge(req.entries);
                   if (!acks) return;
                   auto reply = std::make_shared<Message>();
                   reply->body = AckReply{req.proposal, req.round, target->id(), std::move(*acks)};
                   send(target->id(), kSequencer, std::move(reply));
                 },
                 [&](const AckReply& ack) { ledger_->on_ack(ack.proposal, ack.round, ack.validator, ack.acks); },
                 [&](const ledger::CommitNotice& notice) { target->apply_commit(notice.entries); },
             },
             m.body);
}

void Harness::pump() {
  for (;;) {
    auto effects = ledger_->drain_effects();
    if (effects.empty()) return;
    for (auto& effect : effects) {
      std::visit(overloaded{
                     [&](ledger::AckRequest& req) {
                       if (!deadlines_.count(req.proposal))
                         deadlines_[req.proposal] = schedule(req.deadline, Deadline{req.proposal});
                       for (const auto& v : validators_) {
                         auto m = std::make_shared<Message>();
                         m->body = req;
                         send(kSequencer, v.id(), std::move(m));
                       }
                     },
                     [&](ledger::CommitNotice& notice) {
                       for (const auto& v : validators_) {
                         auto m = std::make_shared<Message>();
                         m->body = notice;
                         send(kSequencer, v.id(), std::move(m));
                       }
                     },
                     [&](ledger::SpendOutcome& outcome) { on_outcome(outcome); },
                 },
                 effect);
    }
  }
}

void Harness::on_outcome(const ledger::SpendOutcome& outcome) {
  if (auto d = deadlines_.find(outcome.proposal); d != deadlines_.end()) {
    queue_.erase(d->second);
    deadlines_.erase(d);
  }
  auto it = pending_.find(outcome.proposal);
  if (it == pending_.end()) return;
  PendingPay p = std::move(it->second);
  pending_.erase(it);
  WalletActor& w = *wallets_[p.wallet];

  if (outcome.error) {
    w.wallet->fail_payment(p.payment_id);
    count("payments_failed");
    if (p.group) ++double_spends_[*p.group].other;
    if (p.awaited) resolved_[outcome.proposal] = {outcome.error, Json()};
    else tally(std::string(error_code_name(*outcome.error)));
    return;
  }

  auto done = w.wallet->complete_payment(p.payment_id, outcome.certificates);
  count("payments_committed");
  if (p.group) ++double_spends_[*p.group].accepted;
  for (const auto& qc : outcome.certificates) certificates_[qc.entry_hash] = qc;
  const Json proof = wallet::payment_proof_to_json(done.proof);
  payflow_capture_ += proof.dump() + "\n";

  for (std::size_t i = 0; i < p.requests.size() && i < outcome.entries.size(); ++i) {
    ++spends_checked_;
    const std::string serial = p.requests[i].asset.serial_hex();
    auto issued = issued_at_.find(serial);
    const Tick age = issued == issued_at_.end() ? -1 : outcome.entries[i].tick - issued->second;
    if (age < config_.cooldown_ticks)
      keep_first(cooldown_violations_, "asset " + serial + " spent at age " + std::to_string(age));
  }

  std::string merchant_status = "accepted";
  MerchantActor* m = merchant_by_account(p.invoice.merchant_id);
  try {
    if (!m) fail(ErrorCode::WrongRecipient, "no till for " + p.invoice.merchant_id);
    m->till->accept_payment(p.invoice, done.transferred, done.proof.certificates);
    count("merchant_accepts");
  } catch (const ProtocolError& e) {
    tally(e.code_name());
    merchant_status = e.code_name();
  }
  if (p.awaited) {
    Json body = proof;
    body["status"] = "paid";
    body["merchant_status"] = merchant_status;
    resolved_[outcome.proposal] = {std::nullopt, std::move(body)};
  }
}

// ---- audits ----------------------------------------------------------------

void Harness::audit_tick() {
  ++ticks_audited_;
  Amount banks = 0, wallets = 0, merchants = 0;
  for (const auto& b : banks_) banks += b->total_balances();
  for (const auto& w : wallets_) wallets += w->wallet->balance(now()).total;
  for (const auto& m : merchants_) merchants += m->till->unredeemed_value();
  const std::string at = "tick " + std::to_string(now()) + ": ";
  if (banks + wallets + merchants != initial_fiat_)
    keep_first(conservation_violations_, at + "banks " + std::to_string(banks) + " + wallets " +
                                             std::to_string(wallets) + " + merchants " + std::to_string(merchants) +
                                             " != " + std::to_string(initial_fiat_));
  const Amount outstanding = mint_->stats().outstanding_value();
  if (outstanding != wallets + merchants)
    keep_first(outstanding_violations_, at + "mint outstanding " + std::to_string(outstanding) + " != held " +
                                            std::to_string(wallets + merchants));
}

std::vector<AuditResult> Harness::audits() const {
  std::vector<AuditResult> out;
  auto add = [&](std::string name, bool passed, std::string detail) {
    out.push_back(AuditResult{std::move(name), passed, std::move(detail)});
  };
  auto violations = [](const std::vector<std::string>& v, const std::string& ok) {
    return v.empty() ? ok : v.front() + (v.size() > 1 ? " (and more)" : "");
  };
  const auto& entries = ledger_->entries();

  add("conservation", conservation_violations_.empty(),
      violations(conservation_violations_, std::to_string(ticks_audited_) + " checks"));
  add("mint-outstanding", outstanding_violations_.empty(),
      violations(outstanding_violations_, std::to_string(ticks_audited_) + " checks"));

  {
    std::set<ledger::Nullifier> seen;
    std::int64_t repeats = 0;
    for (const auto& e : entries)
      if (e.nullifier && !seen.insert(*e.nullifier).second) ++repeats;
    std::int64_t overspent = 0, exact = 0;
    for (const auto& g : double_spends_) {
      if (g.accepted > 1) ++overspent;
      if (g.accepted == 1 && g.already_spent == 1) ++exact;
    }
    add("double-spend", repeats == 0 && overspent == 0,
        std::to_string(repeats) + " repeated nullifiers, " + std::to_string(double_spends_.size()) +
            " double-pay attempts, " + std::to_string(exact) + " with exactly one accepted, " +
            std::to_string(overspent) + " with more than one");
  }

  {
    std::int64_t spends = 0, bad = 0;
    for (const auto& e : entries) {
      if (e.kind != ledger::EntryKind::Spend) continue;
      ++spends;
      auto qc = certificates_.find(e.entry_hash);
      if (qc == certificates_.end() || !ledger::verify_certificate(qc->second, ledger_->validators(), config_.quorum))
        ++bad;
    }
    add("quorum-certificates", bad == 0,
        std::to_string(spends) + " spends, " + std::to_string(bad) + " without a valid certificate");
  }

  add("cooldown", cooldown_violations_.empty(),
      violations(cooldown_violations_, std::to_string(spends_checked_) + " spends checked"));

  {
    std::set<std::string> bank_ids, merchant_accounts;
    for (const auto& b : banks_) bank_ids.insert(b->id());
    for (const auto& m : merchants_) merchant_accounts.insert(m->till->id());
    std::int64_t bad = 0, checked = 0;
    for (const auto& e : entries) {
      if (e.kind == ledger::EntryKind::Spend) {
        ++checked;
        if (e.recipient_id.empty() || !merchant_accounts.count(e.recipient_id)) ++bad;
      } else if (e.kind == ledger::EntryKind::Redemption) {
        ++checked;
        if (e.recipient_id.empty() || !bank_ids.count(e.recipient_id)) ++bad;
      }
    }
    add("recipient-transparency", bad == 0,
        std::to_string(checked) + " spend/redemption entries, " + std::to_string(bad) + " without a known recipient");
  }

  std::vector<std::string> payer_ids, factors, owner_hashes;
  for (const auto& w : wallets_) {
    payer_ids.push_back(in_quotes(w->wallet->linked_account()));
    payer_ids.push_back(in_quotes(w->id));
    payer_ids.push_back(w->wallet->rng_stream_id());
    for (const auto& f : w->wallet->used_blinding_factors()) factors.push_back(f);
    for (const auto& h : w->wallet->used_owner_hashes()) owner_hashes.push_back(h);
  }
  auto hits = [](const std::string& haystack, const std::vector<std::string>& needles) {
    std::int64_t n = 0;
    for (const auto& s : needles)
      if (!s.empty() && haystack.find(s) != std::string::npos) ++n;
    return n;
  };

  {
    std::string dump;
    for (const auto& e : entries) dump += ledger::entry_to_json(e).dump() + "\n";
    const auto n = hits(dump, payer_ids) + hits(dump, owner_hashes);
    add("payer-anonymity", n == 0, std::to_string(n) + " payer identifiers in the ledger");
  }
  {
    const auto n = hits(payflow_capture_, payer_ids) + hits(payflow_capture_, factors);
    add("payflow-anonymity", n == 0,
        std::to_string(payflow_capture_.size()) + " bytes captured, " + std::to_string(n) +
            " account ids or blinding factors");
  }
  {
    const std::string state = mint_->state_json().dump();
    const auto n = hits(state, revealed_) + hits(state, factors);
    add("mint-obliviousness", n == 0,
        std::to_string(revealed_.size()) + " revealed values checked, " + std::to_string(n) + " found in mint state");
  }
  {
    std::int64_t n = 0;
    for (const auto& b : banks_) {
      const std::string state = b->state_json().dump();
      n += hits(state, revealed_) + hits(state, factors);
    }
    add("bank-privacy", n == 0, std::to_string(n) + " revealed values found in bank state");
  }

  {
    std::int64_t rows = 0;
    std::vector<std::string> problems;
    for (std::size_t bi = 0; bi < banks_.size(); ++bi) {
      const auto& b = *banks_[bi];
      Amount aml_total = 0, credited = 0;
      for (const auto& row : b.aml_log()) {
        ++rows;
        aml_total += row.amount;
        if (row.merchant_identity.empty() || row.merchant_identity != b.account(row.account_id).aml_record)
          keep_first(problems, b.id() + ": row for " + row.account_id + " lacks the holder identity");
      }
      for (const auto& m : merchants_)
        if (m->bank == bi) credited += m->till->credited_total();
      if (b.aml_log().size() != b.merchant_credits())
        keep_first(problems, b.id() + ": merchant credits without AML rows");
      if (aml_total != credited) keep_first(problems, b.id() + ": AML amounts differ from merchant credits");
    }
    add("aml-completeness", problems.empty(), violations(problems, std::to_string(rows) + " AML rows"));
  }

  {
    auto r = ledger::verify_chain(entries);
    add("hash-chain", r.ok, r.ok ? std::to_string(r.entries) + " entries" : r.error);
  }

  {
    std::unordered_set<std::string> f(factors.begin(), factors.end()), o(owner_hashes.begin(), owner_hashes.end());
    const bool ok = f.size() == factors.size() && o.size() == owner_hashes.size();
    add("fresh-keys", ok,
        std::to_string(owner_hashes.size()) + " owner keys, " + std::to_string(factors.size()) + " blinding factors");
  }

  {
    std::vector<std::string> problems;
    for (const auto& m : merchants_) {
      Amount paid = 0;
      for (const auto& [id, inv] : m->till->invoices()) {
        const bool is_paid = m->till->invoice_state(id) == merchant::InvoiceState::Paid;
        const std::size_t accepted = m->till->accepted_payments(id);
        if (is_paid) paid += inv.amount;
        if (accepted != (is_paid ? 1u : 0u)) keep_first(problems, id + " accepted " + std::to_string(accepted) + " times");
      }
      if (paid != m->till->paid_total()) keep_first(problems, m->id + ": paid total does not match paid invoices");
    }
    add("invoice-state", problems.empty(), violations(problems, "consistent"));
  }
  return out;
}

bool Harness::all_audits_passed() const {
  auto list = audits();
  return std::all_of(list.begin(), list.end(), [](const AuditResult& a) { return a.passed; });
}

Json Harness::wallet_balance(const std::string& wallet_id) const {
  return wallet::balance_to_json(wallet(wallet_id).balance(now()));
}

Json Harness::ledger_head() const {
  return Json{{"digest", ledger_->ledger_digest().hex()}, {"tick", now()}, {"entries", ledger_->entries().size()}};
}

Json Harness::mint_stats() const { return mint::stats_to_json(mint_->stats()); }

std::int64_t Harness::error_tally(const std::string& code) const {
  auto it = errors_.find(code);
  return it == errors_.end() ? 0 : it->second;
}

std::int64_t Harness::errors_total() const {
  std::int64_t n = 0;
  for (const auto& [code, c] : errors_) n += c;
  return n;
}

std::int64_t Harness::event_count(const std::string& name) const {
  auto it = events_.find(name);
  return it == events_.end() ? 0 : it->second;
}

void Harness::save_aml(const std::filesystem::path& dir) const {
  for (const auto& b : banks_) b->save_aml_jsonl(dir / (b->id() + "_aml.jsonl"));
}

Json Harness::report() const {
  Json j;
  j["seed"] = config_.seed;
  j["final_tick"] = now();

  std::map<std::string, std::int64_t> kinds;
  for (const auto& e : ledger_->entries()) ++kinds[std::string(ledger::entry_kind_name(e.kind))];
  Json ledger_json = ledger_head();
  ledger_json.erase("tick");
  ledger_json["by_kind"] = kinds;
  j["ledger"] = std::move(ledger_json);

  Json banks = Json::object();
  for (const auto& b : banks_) {
    Json accounts = Json::object();
    for (const auto& [id, acct] : b->accounts()) accounts[id] = acct.balance;
    banks[b->id()] = {{"accounts", std::move(accounts)}, {"total", b->total_balances()}};
  }
  Json wallets = Json::object();
  for (const auto& w : wallets_) wallets[w->id] = wallet::balance_to_json(w->wallet->balance(now()));
  Json merchants = Json::object();
  for (const auto& m : merchants_) {
    merchants[m->id] = {{"account", m->till->id()},
                        {"unredeemed", m->till->unredeemed_value()},
                        {"paid", m->till->paid_total()},
                        {"unapplied", m->till->unapplied_total()},
                        {"credited", m->till->credited_total()}};
  }
  j["balances"] = {{"initial_fiat", initial_fiat_}, {"banks", banks}, {"wallets", wallets}, {"merchants", merchants}};
  j["mint"] = mint_stats();

  Json audit_list = Json::array();
  bool all = true;
  for (const auto& a : audits()) {
    all = all && a.passed;
    audit_list.push_back({{"name", a.name}, {"passed", a.passed}, {"detail", a.detail}});
  }
  j["audits"] = std::move(audit_list);
  j["all_audits_passed"] = all;
  j["event_counts"] = events_;
  j["error_tallies"] = errors_;
  return j;
}

Json run_scenario(const ScenarioConfig& config) {
  Harness h(config);
  h.run();
  return h.report();
}

}  // namespace cbdc::sim
