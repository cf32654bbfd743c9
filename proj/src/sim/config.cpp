#include "cbdc/sim/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "cbdc/crypto/rng.hpp"
#include "cbdc/error.hpp"

namespace cbdc::sim {
namespace {

constexpr Amount kDefaultOpeningBalance = 100;

[[noreturn]] void invalid(const std::string& msg) { fail(ErrorCode::ConfigInvalid, msg); }

template <typename T>
T get_or(const Json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const Json::exception&) {
    invalid(std::string("field '") + key + "' has the wrong type");
  }
}

bool is_count(const Json& v) { return v.is_number_integer() && v.get<std::int64_t>() >= 0; }

std::size_t count_of(const Json& j, const char* key, std::size_t fallback) {
  if (!j.contains(key)) return fallback;
  const Json& v = j.at(key);
  if (is_count(v)) return v.get<std::size_t>();
  if (v.is_object() && v.contains("count") && is_count(v.at("count"))) return v.at("count").get<std::size_t>();
  invalid(std::string("field '") + key + "' must be a count or {count}");
}

// Actor ids are a one-letter role prefix and an index: w0, m2, b1, v0.
bool actor_in_range(const std::string& actor, char role, std::size_t count) {
  if (actor.size() < 2 || actor[0] != role) return false;
  if (!std::all_of(actor.begin() + 1, actor.end(), [](char c) { return c >= '0' && c <= '9'; })) return false;
  if (actor.size() > 2 && actor[1] == '0') return false;
  return std::stoull(actor.substr(1)) < count;
}

}  // namespace

Tick ScenarioConfig::horizon() const {
  if (max_ticks) return *max_ticks;
  Tick last = 0;
  for (const auto& e : script) last = std::max(last, e.tick);
  return last + quorum_timeout_ticks + 4 * latency.max + 5;
}

bool is_fault_kind(const std::string& kind) {
  return kind == "partition" || kind == "drop-spike" || kind == "validator-crash" || kind == "mint-corrupt";
}

bool is_script_action(const std::string& action) {
  return action == "withdraw" || action == "pay" || action == "double_pay" || action == "invoice" ||
         action == "deposit" || action == "fault";
}

void validate(const ScenarioConfig& c) {
  if (c.key_bits != 512 && c.key_bits != 1024 && c.key_bits != 2048) invalid("key_bits must be 512, 1024 or 2048");
  if (c.banks == 0) invalid("at least one bank is required");
  if (c.validators == 0) invalid("at least one validator is required");
  if (c.quorum == 0 || c.quorum > c.validators) invalid("quorum k must satisfy 1 <= k <= n");
  for (Amount b : c.wallet_balances)
    if (b < 0) invalid("wallet initial balances must be non-negative");
  if (c.cooldown_ticks < 0) invalid("cooldown_ticks must be non-negative");
  if (c.quorum_timeout_ticks < 1) invalid("quorum_timeout_ticks must be positive");
  if (c.invoice_ttl_ticks < 0) invalid("invoice_ttl_ticks must be non-negative");
  if (c.denominations.empty()) invalid("denominations must not be empty");
  for (std::size_t i = 0; i < c.denominations.size(); ++i) {
    if (c.denominations[i] <= 0) invalid("denominations must be positive");
    if (i > 0 && c.denominations[i] <= c.denominations[i - 1]) invalid("denominations must be strictly increasing");
  }
  if (c.latency.min < 0 || c.latency.max < c.latency.min) invalid("latency must satisfy 0 <= min <= max");
  if (!(c.drop_rate >= 0.0 && c.drop_rate <= 1.0)) invalid("drop_rate must be in [0, 1]");
  if (c.max_ticks && *c.max_ticks < 0) invalid("max_ticks must be non-negative");
  for (const auto& f : c.faults) {
    if (!is_fault_kind(f.kind)) invalid("unknown fault kind '" + f.kind + "'");
    if (f.from_tick < 0 || (f.to_tick && *f.to_tick < f.from_tick)) invalid("fault window must satisfy 0 <= from <= to");
  }
  for (const auto& e : c.script) {
    if (e.tick < 0) invalid("script ticks must be non-negative");
    const bool wallet_action = e.action == "withdraw" || e.action == "pay" || e.action == "double_pay";
    const bool merchant_action = e.action == "invoice" || e.action == "deposit";
    if (!is_script_action(e.action)) invalid("unknown script action '" + e.action + "'");
    if (wallet_action && !actor_in_range(e.actor, 'w', c.wallet_balances.size()))
      invalid("action '" + e.action + "' needs a wallet actor, got '" + e.actor + "'");
    if (merchant_action && !actor_in_range(e.actor, 'm', c.merchants))
      invalid("action '" + e.action + "' needs a merchant actor, got '" + e.actor + "'");
    if (e.action == "fault" && e.actor != "sim") invalid("fault events use the actor 'sim'");
    if (!e.params.is_object()) invalid("script params must be an object");
  }
}

ScenarioConfig config_from_json(const Json& j) {
  if (!j.is_object()) invalid("config must be a JSON object");
  ScenarioConfig c;
  c.seed = get_or<std::uint64_t>(j, "seed", 0);
  c.key_bits = get_or<unsigned>(j, "key_bits", 512);

  if (j.contains("wallets")) {
    const Json& w = j.at("wallets");
    if (is_count(w)) {
      c.wallet_balances.assign(w.get<std::size_t>(), kDefaultOpeningBalance);
    } else if (w.is_object()) {
      std::size_t n = get_or<std::size_t>(w, "count", 1);
      if (w.contains("initial_balances")) {
        c.wallet_balances = get_or<std::vector<Amount>>(w, "initial_balances", {});
        if (w.contains("count") && c.wallet_balances.size() != n)
          invalid("wallets.initial_balances must have one entry per wallet");
      } else {
        c.wallet_balances.assign(n, get_or<Amount>(w, "initial_balance", kDefaultOpeningBalance));
      }
    } else {
      invalid("field 'wallets' must be a count or an object");
    }
  } else {
    c.wallet_balances.assign(1, kDefaultOpeningBalance);
  }
  c.merchants = count_of(j, "merchants", 1);
  c.banks = count_of(j, "banks", 1);

  if (j.contains("validators")) {
    const Json& v = j.at("validators");
    if (is_count(v)) {
      c.validators = v.get<std::size_t>();
      c.quorum = c.validators / 2 + 1;
    } else if (v.is_object()) {
      c.validators = get_or<std::size_t>(v, "n", 3);
      c.quorum = get_or<std::size_t>(v, "k", c.validators / 2 + 1);
    } else {
      invalid("field 'validators' must be a count or {n, k}");
    }
  }
  c.cooldown_ticks = get_or<Tick>(j, "cooldown_ticks", c.cooldown_ticks);
  c.quorum_timeout_ticks = get_or<Tick>(j, "quorum_timeout_ticks", c.quorum_timeout_ticks);
  c.invoice_ttl_ticks = get_or<Tick>(j, "invoice_ttl_ticks", c.invoice_ttl_ticks);
  c.denominations = get_or<std::vector<Amount>>(j, "denominations", c.denominations);
  if (j.contains("latency")) {
    const Json& l = j.at("latency");
    if (l.is_number_integer()) {
      c.latency.min = c.latency.max = l.get<Tick>();
    } else if (l.is_object()) {
      c.latency.min = get_or<Tick>(l, "min", 0);
      c.latency.max = get_or<Tick>(l, "max", c.latency.min);
    } else {
      invalid("field 'latency' must be a tick count or {min, max}");
    }
  }
  c.drop_rate = get_or<double>(j, "drop_rate", 0.0);
  if (j.contains("max_ticks")) c.max_ticks = get_or<Tick>(j, "max_ticks", 0);

  if (j.contains("faults")) {
    if (!j.at("faults").is_array()) invalid("field 'faults' must be an array");
    for (const Json& f : j.at("faults")) {
      if (!f.is_object()) invalid("each fault must be an object");
      FaultSpec spec;
      spec.kind = get_or<std::string>(f, "kind", "");
      spec.params = f.contains("params") ? f.at("params") : Json::object();
      spec.from_tick = get_or<Tick>(f, "from_tick", 0);
      if (f.contains("to_tick")) spec.to_tick = get_or<Tick>(f, "to_tick", 0);
      c.faults.push_back(std::move(spec));
    }
  }
  if (j.contains("script")) {
    if (!j.at("script").is_array()) invalid("field 'script' must be an array");
    for (const Json& e : j.at("script")) {
      if (!e.is_object()) invalid("each script event must be an object");
      ScriptEvent ev;
      ev.tick = get_or<Tick>(e, "tick", 0);
      ev.actor = get_or<std::string>(e, "actor", "");
      ev.action = get_or<std::string>(e, "action", "");
      ev.params = e.contains("params") ? e.at("params") : Json::object();
      c.script.push_back(std::move(ev));
    }
  }
  std::stable_sort(c.script.begin(), c.script.end(),
                   [](const ScriptEvent& a, const ScriptEvent& b) { return a.tick < b.tick; });
  validate(c);
  return c;
}

Json config_to_json(const ScenarioConfig& c) {
  Json j;
  j["seed"] = c.seed;
  j["key_bits"] = c.key_bits;
  j["wallets"] = {{"count", c.wallet_balances.size()}, {"initial_balances", c.wallet_balances}};
  j["merchants"] = c.merchants;
  j["banks"] = c.banks;
  j["validators"] = {{"n", c.validators}, {"k", c.quorum}};
  j["cooldown_ticks"] = c.cooldown_ticks;
  j["quorum_timeout_ticks"] = c.quorum_timeout_ticks;
  j["invoice_ttl_ticks"] = c.invoice_ttl_ticks;
  j["denominations"] = c.denominations;
  j["latency"] = {{"min", c.latency.min}, {"max", c.latency.max}};
  j["drop_rate"] = c.drop_rate;
  if (c.max_ticks) j["max_ticks"] = *c.max_ticks;
  Json faults = Json::array();
  for (const auto& f : c.faults) {
    Json fj = {{"kind", f.kind}, {"params", f.params}, {"from_tick", f.from_tick}};
    if (f.to_tick) fj["to_tick"] = *f.to_tick;
    faults.push_back(std::move(fj));
  }
  j["faults"] = std::move(faults);
  Json script = Json::array();
  for (const auto& e : c.script)
    script.push_back({{"tick", e.tick}, {"actor", e.actor}, {"action", e.action}, {"params", e.params}});
  j["script"] = std::move(script);
  return j;
}

ScenarioConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) invalid("cannot open config " + path.string());
  Json j;
  try {
    j = Json::parse(in);
  } catch (const Json::exception& e) {
    invalid("config " + path.string() + " is not valid JSON: " + e.what());
  }
  return config_from_json(j);
}

ScenarioConfig random_scenario(std::uint64_t seed) {
  crypto::RngStream rng(seed, "scenario");
  auto pick = [&](std::uint64_t lo, std::uint64_t hi) { return static_cast<std::int64_t>(rng.uniform(lo, hi)); };

  ScenarioConfig c;
  c.seed = seed;
  const auto wallets = static_cast<std::size_t>(pick(1, 10));
  c.merchants = static_cast<std::size_t>(pick(1, 5));
  c.banks = static_cast<std::size_t>(pick(1, 3));
  c.validators = static_cast<std::size_t>(pick(3, 5));
  c.quorum = c.validators / 2 + 1;
  for (std::size_t i = 0; i < wallets; ++i) c.wallet_balances.push_back(pick(50, 500));
  c.cooldown_ticks = pick(1, 8);
  c.quorum_timeout_ticks = pick(4, 10);
  c.invoice_ttl_ticks = pick(10, 40);
  c.latency.min = pick(0, 1);
  c.latency.max = c.latency.min + pick(0, 2);
  c.drop_rate = static_cast<double>(pick(0, 10)) / 100.0;
  const Tick max_ticks = pick(60, 200);
  c.max_ticks = max_ticks;
  const Tick last_action = max_ticks - 2 * c.quorum_timeout_ticks - 10;

  auto wallet = [&] { return "w" + std::to_string(pick(0, wallets - 1)); };
  auto merchant = [&] { return "m" + std::to_string(pick(0, c.merchants - 1)); };
  auto add = [&](Tick t, std::string actor, std::string action, Json params) {
    c.script.push_back({t, std::move(actor), std::move(action), std::move(params)});
  };
  auto amount_json = [](Amount a) { return Json{{"amount", a}}; };

  // Always at least one payment attempted while the funds are still hot.
  {
    const Tick t = pick(0, static_cast<std::uint64_t>(last_action / 2));
    const std::string w = wallet(), m = merchant();
    const Amount a = pick(1, 40);
    add(t, w, "withdraw", amount_json(a));
    add(t, m, "invoice", amount_json(a));
    add(t + pick(0, static_cast<std::uint64_t>(c.cooldown_ticks - 1)), w, "pay", {{"merchant", m}});
  }

  const auto events = pick(10, 60);
  for (std::int64_t i = 0; i < events; ++i) {
    const Tick t = pick(0, static_cast<std::uint64_t>(last_action));
    const auto roll = pick(0, 99);
    if (roll < 35) {
      // Withdraw and spend the same amount; early when the delays are short.
      const std::string w = wallet(), m = merchant();
      const Amount a = pick(1, 80);
      const Tick invoice_at = t + pick(0, static_cast<std::uint64_t>(c.cooldown_ticks + 3));
      add(t, w, "withdraw", amount_json(a));
      add(invoice_at, m, "invoice", amount_json(a));
      add(invoice_at + pick(0, 3), w, "pay", {{"merchant", m}});
    } else if (roll < 50) {
      add(t, wallet(), "withdraw", amount_json(pick(1, 150)));
    } else if (roll < 68) {
      const std::string m = merchant();
      add(t, m, "invoice", amount_json(pick(1, 60)));
      add(t + pick(0, 12), wallet(), "pay", {{"merchant", m}});
    } else if (roll < 80) {
      add(t, merchant(), "deposit", Json::object());
    } else if (roll < 88 && c.merchants >= 2) {
      const Amount a = pick(1, 30);
      const std::string w = wallet();
      add(t, w, "withdraw", amount_json(a));
      add(t, "m0", "invoice", amount_json(a));
      add(t, "m1", "invoice", amount_json(a));
      add(t + c.cooldown_ticks, w, "double_pay", {{"merchants", {"m0", "m1"}}, {"amount", a}});
    } else {
      const auto kind = pick(0, 2);
      const Tick until = t + pick(3, 20);
      Json params;
      std::string name;
      if (kind == 0) {
        name = "validator-crash";
        params = {{"validators", {"v" + std::to_string(pick(0, c.validators - 1))}}};
      } else if (kind == 1) {
        name = "partition";
        params = {{"validators", {"v" + std::to_string(pick(0, c.validators - 1))}}};
      } else {
        name = "drop-spike";
        params = {{"rate", static_cast<double>(pick(20, 60)) / 100.0}};
      }
      add(t, "sim", "fault", {{"kind", name}, {"params", params}, {"to_tick", until}});
    }
  }
  for (std::size_t m = 0; m < c.merchants; ++m) add(last_action + 5, "m" + std::to_string(m), "deposit", Json::object());

  std::stable_sort(c.script.begin(), c.script.end(),
                   [](const ScriptEvent& a, const ScriptEvent& b) { return a.tick < b.tick; });
  validate(c);
  return c;
}

}  // namespace cbdc::sim
