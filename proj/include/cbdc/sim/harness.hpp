#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "cbdc/merchant/till.hpp"
#include "cbdc/sim/config.hpp"
#include "cbdc/wallet/wallet.hpp"

namespace cbdc::sim {

struct AuditResult {
  std::string name;
  bool passed = true;
  std::string detail;
};

/// Deterministic discrete-event world: one mint, its banks, wallets,
/// merchants, the ledger sequencer and its validators.
///
/// Everything runs on one logical clock. Events are ordered by (tick,
/// sequence number). Sequencer/validator traffic goes through a simulated
/// network with latency, drops and fault windows; wallet, merchant and bank
/// calls are direct.
///
/// Scripted events and interactive callers (the gateway) go through the same
/// perform() entry point, so an interactive session and the equivalent script
/// produce the same ledger.
class Harness {
 public:
  explicit Harness(ScenarioConfig config);
  ~Harness();
  Harness(const Harness&) = delete;
  Harness& operator=(const Harness&) = delete;

  const ScenarioConfig& config() const { return config_; }
  Tick now() const;

  // Advances the clock tick by tick, delivering everything that falls due.
  Tick step(Tick ticks = 1);
  // Steps until the script and all traffic have drained, or the horizon.
  void run();
  bool idle() const;

  // Throws UnknownFaultKind, or ConfigInvalid for unusable params.
  void inject_fault(const std::string& kind, const Json& params, Tick from_tick, std::optional<Tick> to_tick);

  // Runs one action for an actor right now. Protocol errors are tallied and
  // rethrown. Throws UnknownActor for ids that do not exist.
  //   wallet:   withdraw {amount}, pay {invoice | invoice_id | merchant}, double_pay {merchants, amount?}
  //   merchant: invoice {amount}, deposit
  //   sim:      fault {kind, params, from_tick?, to_tick?}
  Json perform(const std::string& actor, const std::string& action, const Json& params);

  Json wallet_balance(const std::string& wallet_id) const;
  Json ledger_head() const;
  Json mint_stats() const;

  std::vector<AuditResult> audits() const;
  bool all_audits_passed() const;
  // Byte-stable across runs of the same config.
  Json report() const;

  std::int64_t error_tally(const std::string& code) const;
  std::int64_t event_count(const std::string& name) const;
  std::int64_t errors_total() const;

  const ledger::Ledger& ledger() const { return *ledger_; }
  const wallet::Wallet& wallet(const std::string& id) const;
  const merchant::MerchantTill& merchant(const std::string& id) const;
  const bank::IntermediaryBank& bank(const std::string& id) const;
  const mint::MintAuthority& mint() const { return *mint_; }
  std::vector<std::string> wallet_ids() const;
  std::vector<std::string> merchant_ids() const;

  void save_ledger(const std::filesystem::path& path) const { ledger_->save_jsonl(path); }
  void save_aml(const std::filesystem::path& dir) const;

 private:
  struct WalletActor;
  struct MerchantActor;
  struct ActiveFault;
  struct PendingPay;
  struct DoubleSpend;
  struct Message;
  struct Deadline {
    ledger::ProposalId proposal = 0;
  };
  using Event = std::variant<ScriptEvent, std::shared_ptr<Message>, Deadline>;

  WalletActor& wallet_actor(const std::string& id);
  MerchantActor& merchant_actor(const std::string& id);
  MerchantActor* merchant_by_account(const std::string& account_id);

  Json do_withdraw(WalletActor& w, const Json& params);
  Json do_invoice(MerchantActor& m, const Json& params);
  Json do_pay(WalletActor& w, const Json& params);
  Json do_double_pay(WalletActor& w, const Json& params);
  Json do_deposit(MerchantActor& m);
  Json do_fault(const Json& params);
  wallet::Invoice resolve_invoice(const Json& params);
  ledger::ProposalId submit(WalletActor& w, const wallet::PreparedPayment& p, std::optional<std::size_t> group);

  std::pair<Tick, std::uint64_t> schedule(Tick at, Event e);
  void process_due();
  void settle();
  void handle(const Event& e);
  void deliver(const Message& m);
  void send(const std::string& from, const std::string& to, std::shared_ptr<Message> m);
  void pump();
  void on_outcome(const ledger::SpendOutcome& outcome);
  void audit_tick();
  void tally(std::string_view code) { ++errors_[std::string(code)]; }
  void count(const std::string& name, std::int64_t n = 1) { events_[name] += n; }

  bool crashed(const std::string& validator, Tick t) const;
  bool partitioned(const std::string& a, const std::string& b, Tick t) const;
  double drop_rate(Tick t) const;
  bool mint_corrupt(Tick t) const;

  ScenarioConfig config_;
  crypto::RngStream network_rng_;
  std::vector<ledger::Validator> validators_;
  std::unique_ptr<ledger::Ledger> ledger_;
  std::unique_ptr<mint::MintAuthority> mint_;
  std::vector<std::unique_ptr<bank::IntermediaryBank>> banks_;
  std::vector<std::unique_ptr<WalletActor>> wallets_;
  std::vector<std::unique_ptr<MerchantActor>> merchants_;
  std::vector<ActiveFault> faults_;

  std::map<std::pair<Tick, std::uint64_t>, Event> queue_;
  std::uint64_t next_seq_ = 0;
  std::map<ledger::ProposalId, std::pair<Tick, std::uint64_t>> deadlines_;  // queue keys
  std::map<ledger::ProposalId, PendingPay> pending_;
  std::map<ledger::ProposalId, std::pair<std::optional<ErrorCode>, Json>> resolved_;
  std::vector<DoubleSpend> double_spends_;

  Amount initial_fiat_ = 0;
  std::map<std::string, std::int64_t> errors_;
  std::map<std::string, std::int64_t> events_;

  // Audit evidence gathered while running.
  std::int64_t ticks_audited_ = 0;
  std::vector<std::string> conservation_violations_;
  std::vector<std::string> outstanding_violations_;
  std::vector<std::string> cooldown_violations_;
  std::int64_t spends_checked_ = 0;
  std::map<std::string, Tick> issued_at_;  // serial hex -> withdrawal tick
  std::vector<std::string> revealed_;      // serials, owner hashes, unblinded signatures
  std::string payflow_capture_;
  std::map<crypto::Digest, ledger::QuorumCertificate> certificates_;
};

// Loads, runs and reports in one go.
Json run_scenario(const ScenarioConfig& config);

}  // namespace cbdc::sim
