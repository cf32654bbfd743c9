// One PASS/FAIL line per acceptance criterion. Exit status is non-zero if any
// criterion fails.
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numeric>
#include <string>
#include <thread>

#include "cbdc/gateway/gateway.hpp"
#include "cbdc/sim/harness.hpp"
#include "httplib.h"

#ifndef SANDBOX_PATH
#error "SANDBOX_PATH must name the sandbox executable"
#endif

using namespace cbdc;
using crypto::BigInt;

namespace {

int failures = 0;

void report(const std::string& criterion, bool passed, const std::string& detail) {
  std::printf("%s  %-26s %s\n", passed ? "PASS" : "FAIL", criterion.c_str(), detail.c_str());
  std::fflush(stdout);
  if (!passed) ++failures;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

const sim::AuditResult* find_audit(const std::vector<sim::AuditResult>& audits, const std::string& name) {
  for (const auto& a : audits)
    if (a.name == name) return &a;
  return nullptr;
}

Json event(Tick tick, const std::string& actor, const std::string& action, Json params = Json::object()) {
  return Json{{"tick", tick}, {"actor", actor}, {"action", action}, {"params", std::move(params)}};
}

// ---- blind signatures ------------------------------------------------------

void blind_signature_laws() {
  const auto start = std::chrono::steady_clock::now();
  std::int64_t roundtrips = 0, rejections = 0, violations = 0;
  auto exercise = [&](unsigned bits, int pairs, std::uint64_t seed) {
    crypto::RngStream rng(seed, "acceptance/blind-" + std::to_string(bits));
    const auto key = crypto::generate_keypair(bits, rng);
    const auto other = crypto::generate_keypair(bits, rng);
    const auto& pk = key.public_part;
    for (int i = 0; i < pairs; ++i) {
      crypto::Digest message;
      message.bytes = rng.bytes32();
      const auto r = crypto::draw_blinding_factor(pk, rng);
      const BigInt sig = crypto::unblind(crypto::blind_sign(crypto::blind(message, r, pk), key), r, pk);
      if (crypto::verify_blind_signature(message, sig, pk)) ++roundtrips;
      else ++violations;

      crypto::Digest tampered = message;
      tampered.bytes[i % 32] ^= 0x01;
      const bool bad_message = crypto::verify_blind_signature(tampered, sig, pk);
      const bool bad_signature = crypto::verify_blind_signature(message, sig + 1, pk);
      const bool cross_key = crypto::verify_blind_signature(message, sig, other.public_part);
      for (bool accepted : {bad_message, bad_signature, cross_key}) {
        if (accepted) ++violations;
        else ++rejections;
      }
    }
  };
  exercise(512, 1000, 1);
  exercise(2048, 20, 2);
  const double elapsed = seconds_since(start);
  report("blind-signature-laws", violations == 0 && roundtrips == 1020 && elapsed < 30.0,
         std::to_string(roundtrips) + "/1020 roundtrips verified, " + std::to_string(rejections) +
             " tamper/cross-key cases rejected, " + std::to_string(violations) + " violations, " + fmt(elapsed) +
             " s (limit 30 s)");
}

// Independent school-book arithmetic on machine integers.
std::uint64_t pow_mod(std::uint64_t base, std::uint64_t exp, std::uint64_t mod) {
  std::uint64_t result = 1 % mod;
  base %= mod;
  for (std::uint64_t i = 0; i < exp; ++i) result = result * base % mod;
  return result;
}

std::int64_t inverse_mod(std::int64_t a, std::int64_t m) {
  std::int64_t old_r = a, r = m, old_s = 1, s = 0;
  while (r != 0) {
    const std::int64_t q = old_r / r;
    std::tie(old_r, r) = std::make_tuple(r, old_r - q * r);
    std::tie(old_s, s) = std::make_tuple(s, old_s - q * s);
  }
  return old_r == 1 ? ((old_s % m) + m) % m : -1;
}

void toy_rsa_oracle() {
  const std::uint64_t p = 61, q = 53, n = p * q, e = 17;
  const auto d = static_cast<std::uint64_t>(inverse_mod(e, (p - 1) * (q - 1)));
  const auto key = crypto::keypair_from_primes(61, 53, 17);
  const auto& pk = key.public_part;
  crypto::RngStream rng(3, "acceptance/toy");
  int agree = 0;
  for (int i = 0; i < 100; ++i) {
    const std::uint64_t m = rng.uniform(0, n - 1);
    std::uint64_t r;
    do r = rng.uniform(2, n - 1);
    while (std::gcd(r, n) != 1);
    const std::uint64_t blinded = m * pow_mod(r, e, n) % n;
    const std::uint64_t signed_blinded = pow_mod(blinded, d, n);
    const std::uint64_t unblinded = signed_blinded * static_cast<std::uint64_t>(inverse_mod(r, n)) % n;

    const crypto::BlindingFactor factor{BigInt(static_cast<unsigned long>(r)), "oracle", 0};
    const BigInt b = crypto::blind(BigInt(static_cast<unsigned long>(m)), factor, pk);
    const BigInt s = crypto::blind_sign(b, key);
    const BigInt u = crypto::unblind(s, factor, pk);
    if (b == blinded && s == signed_blinded && u == unblinded && u == pow_mod(m, d, n)) ++agree;
  }
  report("toy-rsa-oracle", agree == 100 && key.secret_exponent == d,
         std::to_string(agree) + "/100 inputs agree exactly (n=3233, e=17, d=" + std::to_string(d) + ")");
}

// ---- protocol ----------------------------------------------------------------

void double_spend() {
  int exact = 0, violations = 0;
  for (int i = 0; i < 100; ++i) {
    crypto::RngStream rng(static_cast<std::uint64_t>(i), "acceptance/double-spend");
    const Amount amount = static_cast<Amount>(rng.uniform(1, 100));
    const auto n = rng.uniform(3, 5);
    const Tick lat_min = static_cast<Tick>(rng.uniform(0, 1));
    const Tick cooldown = static_cast<Tick>(rng.uniform(1, 6));
    Json config{{"seed", 5000 + i},
                {"wallets", {{"count", 1}, {"initial_balance", 200}}},
                {"merchants", 2},
                {"validators", {{"n", n}, {"k", n / 2 + 1}}},
                {"cooldown_ticks", cooldown},
                {"latency", {{"min", lat_min}, {"max", lat_min + static_cast<Tick>(rng.uniform(0, 2))}}},
                {"script", Json::array({event(1, "w0", "withdraw", {{"amount", amount}}),
                                        event(2, "m0", "invoice", {{"amount", amount}}),
                                        event(2, "m1", "invoice", {{"amount", amount}}),
                                        event(1 + cooldown, "w0", "double_pay", {{"merchants", {"m0", "m1"}}}),
                                        event(20, "m0", "deposit"), event(20, "m1", "deposit")})}};
    sim::Harness h(sim::config_from_json(config));
    h.run();
    const bool one_each = h.event_count("payments_committed") == 1 && h.error_tally("AlreadySpent") == 1;
    const Amount received = h.merchant("m0").credited_total() + h.merchant("m1").credited_total();
    if (one_each && received == amount) ++exact;
    const auto* audit = find_audit(h.audits(), "double-spend");
    if (!audit || !audit->passed || h.event_count("payments_committed") > 1) ++violations;
  }
  report("double-spend", exact == 100 && violations == 0,
         std::to_string(exact) + "/100 variations with exactly one accepted and one AlreadySpent, " +
             std::to_string(violations) + " violations");
}

struct ScenarioSweep {
  std::int64_t runs = 0;
  std::int64_t tick_checks = 0;
  std::map<std::string, std::int64_t> audit_failures;
  std::int64_t spends = 0;
  std::int64_t hot_refusals = 0;
  std::int64_t determinism_failures = 0;
  std::int64_t replay_failures = 0;
  std::int64_t replayed = 0;
};

ScenarioSweep sweep_random_scenarios(const std::filesystem::path& dir) {
  ScenarioSweep s;
  for (std::uint64_t seed = 1; seed <= 50; ++seed) {
    const auto config = sim::random_scenario(seed);
    sim::Harness first(config);
    first.run();
    sim::Harness second(config);
    second.run();
    ++s.runs;
    s.tick_checks += first.now() + 1;
    for (const auto& a : first.audits())
      if (!a.passed) ++s.audit_failures[a.name];
    s.spends += first.event_count("payments_committed");
    s.hot_refusals += first.error_tally("HotAsset");
    if (first.report().dump() != second.report().dump() ||
        first.ledger().ledger_digest() != second.ledger().ledger_digest())
      ++s.determinism_failures;

    const auto path = dir / ("ledger-" + std::to_string(seed) + ".jsonl");
    first.save_ledger(path);
    const std::string cmd = std::string(SANDBOX_PATH) + " replay --ledger " + path.string() + " > /dev/null";
    ++s.replayed;
    if (std::system(cmd.c_str()) != 0) ++s.replay_failures;
  }
  return s;
}

void conservation(const ScenarioSweep& s) {
  const auto failed = s.audit_failures.count("conservation") ? s.audit_failures.at("conservation") : 0;
  const auto outstanding = s.audit_failures.count("mint-outstanding") ? s.audit_failures.at("mint-outstanding") : 0;
  report("conservation", failed == 0 && outstanding == 0 && s.runs == 50,
         std::to_string(s.runs) + " random scenarios, identity checked at every tick, " + std::to_string(failed) +
             " scenarios with a violation");
}

void cooldown(const ScenarioSweep& s) {
  const auto failed = s.audit_failures.count("cooldown") ? s.audit_failures.at("cooldown") : 0;
  Json config{{"seed", 42},
              {"wallets", {{"count", 1}, {"initial_balance", 100}}},
              {"merchants", 1},
              {"cooldown_ticks", 5},
              {"script", Json::array({event(1, "w0", "withdraw", {{"amount", 37}}),
                                      event(2, "m0", "invoice", {{"amount", 37}}),
                                      event(3, "w0", "pay", {{"merchant", "m0"}})})}};
  sim::Harness h(sim::config_from_json(config));
  h.run();
  const bool early_refused = h.error_tally("HotAsset") == 1 && h.event_count("payments_committed") == 0;
  report("cooldown", failed == 0 && early_refused,
         std::to_string(failed) + "/" + std::to_string(s.runs) + " scenarios spent a young asset (" + std::to_string(s.spends) +
             " payments committed, " + std::to_string(s.hot_refusals) + " HotAsset refusals); scripted early pay -> " +
             (early_refused ? "HotAsset" : "not refused"));
}

void privacy(const ScenarioSweep& s) {
  std::int64_t failed = 0;
  std::string which;
  for (const char* name : {"recipient-transparency", "payer-anonymity", "payflow-anonymity", "mint-obliviousness",
                           "bank-privacy", "aml-completeness"}) {
    if (s.audit_failures.count(name)) {
      failed += s.audit_failures.at(name);
      which += std::string(" ") + name;
    }
  }
  report("privacy-aml", failed == 0,
         "6 audits x " + std::to_string(s.runs) + " scenarios, " + std::to_string(failed) + " failures" + which);
}

void determinism(const ScenarioSweep& s) {
  report("determinism-replay", s.determinism_failures == 0 && s.replay_failures == 0,
         std::to_string(s.runs) + " scenarios run twice, " + std::to_string(s.determinism_failures) +
             " report/digest mismatches; sandbox replay verified " +
             std::to_string(s.replayed - s.replay_failures) + "/" + std::to_string(s.replayed) + " ledgers");
}

void quorum() {
  constexpr int kPayments = 20;
  auto run = [&](int crashed, int& successes, int& timeouts, int& restored) {
    Json config{{"seed", 77},
                {"wallets", {{"count", 1}, {"initial_balance", 1000}}},
                {"merchants", 1},
                {"validators", {{"n", 3}, {"k", 2}}},
                {"cooldown_ticks", 1},
                {"quorum_timeout_ticks", 6},
                {"latency", {{"min", 1}, {"max", 1}}},
                {"faults", Json::array({{{"kind", "validator-crash"}, {"params", {{"count", crashed}}}}})}};
    sim::Harness h(sim::config_from_json(config));
    for (int i = 0; i < kPayments; ++i) h.perform("w0", "withdraw", {{"amount", 5}});
    h.step(1);
    for (int i = 0; i < kPayments; ++i) {
      h.perform("m0", "invoice", {{"amount", 5}});
      const Amount before = h.wallet("w0").balance(h.now()).spendable;
      const auto committed = h.event_count("payments_committed");
      const auto timed_out = h.error_tally("QuorumTimeout");
      h.perform("w0", "pay", {{"merchant", "m0"}});
      h.step(7);
      if (h.event_count("payments_committed") == committed + 1) ++successes;
      if (h.error_tally("QuorumTimeout") == timed_out + 1) {
        ++timeouts;
        const auto b = h.wallet("w0").balance(h.now());
        if (b.spendable == before && b.in_flight == 0) ++restored;
      }
    }
  };
  int s1 = 0, t1 = 0, r1 = 0, s2 = 0, t2 = 0, r2 = 0;
  run(1, s1, t1, r1);
  run(2, s2, t2, r2);
  report("quorum", s1 == kPayments && t1 == 0 && s2 == 0 && t2 == kPayments && r2 == kPayments,
         "N=3 K=2: 1 crashed -> " + std::to_string(s1) + "/20 committed; 2 crashed -> " + std::to_string(t2) +
             "/20 QuorumTimeout, " + std::to_string(r2) + "/20 restored to spendable");
}

void gateway_equivalence() {
  const Json base{{"seed", 9},
                  {"wallets", {{"count", 2}, {"initial_balances", {120, 80}}}},
                  {"merchants", 2},
                  {"validators", {{"n", 3}, {"k", 2}}},
                  {"cooldown_ticks", 3}};
  // (tick, actor, action, params) performed interactively after stepping to tick.
  const std::vector<Json> steps = {
      event(1, "w0", "withdraw", {{"amount", 37}}), event(1, "w1", "withdraw", {{"amount", 25}}),
      event(2, "m0", "invoice", {{"amount", 37}}),  event(2, "w0", "pay", {{"merchant", "m0"}}),
      event(5, "w0", "pay", {{"merchant", "m0"}}),  event(6, "m1", "invoice", {{"amount", 20}}),
      event(6, "w1", "pay", {{"merchant", "m1"}}),  event(8, "m0", "deposit"),
      event(9, "m1", "deposit"),
  };

  Json scripted_config = base;
  scripted_config["script"] = steps;
  sim::Harness scripted(sim::config_from_json(scripted_config));
  scripted.run();

  sim::Harness live(sim::config_from_json(base));
  gateway::Gateway gw(live);
  httplib::Server server;
  gw.mount(server);
  const int port = server.bind_to_any_port("127.0.0.1");
  std::thread thread([&] { server.listen_after_bind(); });
  server.wait_until_ready();
  httplib::Client client("127.0.0.1", port);

  Tick tick = 0;
  for (const Json& s : steps) {
    const Tick at = s["tick"].get<Tick>();
    if (at > tick) client.Post("/sim/step", Json{{"ticks", at - tick}}.dump(), "application/json");
    tick = at;
    const std::string actor = s["actor"], action = s["action"];
    const std::string path = action == "invoice"    ? "/merchants/" + actor + "/invoices"
                             : action == "deposit" ? "/merchants/" + actor + "/deposit"
                                                   : "/wallets/" + actor + "/" + action;
    client.Post(path, s["params"].dump(), "application/json");
  }
  auto head = client.Get("/ledger/head");
  server.stop();
  thread.join();

  const std::string live_digest = head ? Json::parse(head->body)["digest"].get<std::string>() : "unreachable";
  const std::string script_digest = scripted.ledger().ledger_digest().hex();
  report("gateway-equivalence",
         live_digest == script_digest && scripted.event_count("payments_committed") == 2 &&
             scripted.error_tally("HotAsset") == 1,
         "interactive " + live_digest.substr(0, 16) + " vs scripted " + script_digest.substr(0, 16) + " (" +
             std::to_string(scripted.ledger().entries().size()) + " entries)");
}

}  // namespace

int main() {
  const auto dir = std::filesystem::temp_directory_path() / "cbdc-acceptance";
  std::filesystem::create_directories(dir);

  blind_signature_laws();
  toy_rsa_oracle();
  double_spend();
  const ScenarioSweep sweep = sweep_random_scenarios(dir);
  conservation(sweep);
  cooldown(sweep);
  privacy(sweep);
  determinism(sweep);
  quorum();
  gateway_equivalence();

  std::filesystem::remove_all(dir);
  std::printf("%s: %d criteria failed\n", failures == 0 ? "ALL PASS" : "FAILURES", failures);
  return failures == 0 ? 0 : 1;
}
