#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "cbdc/gateway/gateway.hpp"
#include "cbdc/ledger/ledger.hpp"
#include "cbdc/sim/harness.hpp"

using namespace cbdc;

namespace {

constexpr int kAuditFailure = 1;
constexpr int kUsageError = 2;

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

int run_command(const std::string& config_path, std::optional<std::uint64_t> seed, const std::string& report_path,
                const std::string& out_dir) {
  sim::ScenarioConfig config = sim::load_config(config_path);
  if (seed) config.seed = *seed;
  sim::Harness harness(config);
  harness.run();
  const Json report = harness.report();

  for (const auto& a : report["audits"])
    std::printf("%s %-24s %s\n", a["passed"].get<bool>() ? "PASS" : "FAIL", a["name"].get<std::string>().c_str(),
                a["detail"].get<std::string>().c_str());
  std::printf("ticks %lld, ledger entries %zu, digest %s\n", static_cast<long long>(harness.now()),
              harness.ledger().entries().size(), harness.ledger().ledger_digest().hex().c_str());
  for (const auto& [code, n] : report["error_tallies"].items())
    std::printf("error %s x%lld\n", code.c_str(), static_cast<long long>(n.get<std::int64_t>()));

  if (!report_path.empty()) {
    const auto parent = std::filesystem::path(report_path).parent_path();
    if (!parent.empty()) std::filesystem::create_directories(parent);
    write_file(report_path, report.dump(2) + "\n");
  }
  if (!out_dir.empty()) {
    std::filesystem::create_directories(out_dir);
    harness.save_ledger(std::filesystem::path(out_dir) / "ledger.jsonl");
    harness.save_aml(out_dir);
    write_file(std::filesystem::path(out_dir) / "report.json", report.dump(2) + "\n");
  }
  return report["all_audits_passed"].get<bool>() ? 0 : kAuditFailure;
}

int replay_command(const std::string& ledger_path) {
  auto r = ledger::replay_jsonl(ledger_path);
  if (!r.ok) {
    std::printf("FAIL %s: %s\n", ledger_path.c_str(), r.error.c_str());
    return kAuditFailure;
  }
  std::printf("ok %zu entries, digest %s\n", r.entries, r.digest.hex().c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Token-based CBDC sandbox: deterministic simulation, audits and an HTTP gateway"};
  app.require_subcommand(1);

  std::string config_path, report_path, out_dir, ledger_path, host = "127.0.0.1", generate_out;
  std::optional<std::uint64_t> seed;
  std::uint64_t generate_seed = 1;
  int port = 8080, autotick_ms = 0;

  auto* run = app.add_subcommand("run", "Run a scenario to completion and audit it");
  run->add_option("--config", config_path, "Scenario JSON")->required()->check(CLI::ExistingFile);
  run->add_option("--seed", seed, "Override the config seed");
  run->add_option("--report", report_path, "Write the run report JSON here");
  run->add_option("--out-dir", out_dir, "Write ledger.jsonl, per-bank AML logs and report.json here");

  auto* serve = app.add_subcommand("serve", "Serve the gateway over a live scenario");
  serve->add_option("--config", config_path, "Scenario JSON")->required()->check(CLI::ExistingFile);
  serve->add_option("--port", port, "TCP port")->required()->check(CLI::Range(1, 65535));
  serve->add_option("--host", host, "Bind address");
  serve->add_option("--autotick", autotick_ms, "Advance one tick every N milliseconds")->check(CLI::NonNegativeNumber);

  auto* replay = app.add_subcommand("replay", "Re-verify a persisted ledger's hash chain");
  replay->add_option("--ledger", ledger_path, "Ledger JSONL")->required()->check(CLI::ExistingFile);

  auto* generate = app.add_subcommand("generate", "Print a random scenario config");
  generate->add_option("--seed", generate_seed, "Generator seed");
  generate->add_option("--out", generate_out, "Write the config here instead of stdout");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) return run_command(config_path, seed, report_path, out_dir);
    if (*replay) return replay_command(ledger_path);
    if (*generate) {
      const std::string text = sim::config_to_json(sim::random_scenario(generate_seed)).dump(2) + "\n";
      if (generate_out.empty()) std::cout << text;
      else write_file(generate_out, text);
      return 0;
    }
    if (*serve) {
      sim::Harness harness(sim::load_config(config_path));
      std::printf("gateway on http://%s:%d (tick %lld)\n", host.c_str(), port, static_cast<long long>(harness.now()));
      std::fflush(stdout);
      gateway::serve(harness, host, port, autotick_ms);
      return 0;
    }
  } catch (const ProtocolError& e) {
    std::fprintf(stderr, "%s: %s\n", std::string(e.code_name()).c_str(), e.what());
    return kUsageError;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kUsageError;
  }
  return kUsageError;
}
