#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "cbdc/asset/codec.hpp"
#include "cbdc/types.hpp"

namespace cbdc::sim {

struct LatencyModel {
  Tick min = 0;
  Tick max = 0;
};

struct FaultSpec {
  std::string kind;  // partition | drop-spike | validator-crash | mint-corrupt
  Json params = Json::object();
  Tick from_tick = 0;
  std::optional<Tick> to_tick;  // exclusive; open-ended when absent
};

struct ScriptEvent {
  Tick tick = 0;
  std::string actor;
  std::string action;
  Json params = Json::object();
};

struct ScenarioConfig {
  std::uint64_t seed = 0;
  unsigned key_bits = 512;
  std::vector<Amount> wallet_balances;  // one per wallet, fiat in the linked account
  std::size_t merchants = 1;
  std::size_t banks = 1;
  std::size_t validators = 3;
  std::size_t quorum = 2;
  Tick cooldown_ticks = 5;
  Tick quorum_timeout_ticks = 10;
  Tick invoice_ttl_ticks = 20;
  std::vector<Amount> denominations = kDefaultDenominations;
  LatencyModel latency;
  double drop_rate = 0.0;
  std::optional<Tick> max_ticks;
  std::vector<FaultSpec> faults;
  std::vector<ScriptEvent> script;

  // The last tick the run may reach.
  Tick horizon() const;
};

// Throws ConfigInvalid with a message naming the offending field.
ScenarioConfig config_from_json(const Json& j);
Json config_to_json(const ScenarioConfig& c);
ScenarioConfig load_config(const std::filesystem::path& path);
void validate(const ScenarioConfig& c);

bool is_fault_kind(const std::string& kind);
bool is_script_action(const std::string& action);

// Random scenario: up to 10 wallets, 5 merchants, 200 ticks, including
// payments attempted before the cooldown has elapsed.
ScenarioConfig random_scenario(std::uint64_t seed);

}  // namespace cbdc::sim
