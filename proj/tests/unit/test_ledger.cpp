#include <filesystem>
#include <fstream>

#include "doctest.h"

#include "cbdc/ledger/ledger.hpp"
#include "fixtures.hpp"

using namespace cbdc;
using namespace cbdc::ledger;
using cbdc::testing::error_of;
using cbdc::testing::MintFixture;

namespace {

struct LedgerFixture {
  MintFixture mint{7};
  std::vector<Validator> validators;
  crypto::SigningKeyPair merchant_key;
  crypto::SigningKeyPair bank_key;
  std::unique_ptr<Ledger> ledger;

  explicit LedgerFixture(std::size_t n = 3, std::size_t k = 2) {
    ValidatorDirectory dir;
    for (std::size_t i = 0; i < n; ++i) {
      std::string id = "v" + std::to_string(i);
      validators.emplace_back(id, crypto::generate_keypair(512, mint.rng));
      dir[id] = validators.back().public_key();
    }
    merchant_key = crypto::generate_keypair(512, mint.rng);
    bank_key = crypto::generate_keypair(512, mint.rng);
    ledger = std::make_unique<Ledger>(LedgerConfig{k, 5, 10}, mint.directory, dir);
    ledger->register_bank("b0");
    for (int i = 0; i < 5; ++i) ledger->tick();
  }

  SpendRequest pay(Amount denom, const std::string& invoice = "inv-1", Tick issued = 0) {
    auto [a, owner] = mint.issue(denom, issued);
    asset::InvoiceRef ref{"m0", invoice};
    return SpendRequest{asset::append_transfer(a, crypto::key_hash(merchant_key.public_part), ref, owner), ref};
  }

  asset::Asset to_bank(const asset::Asset& paid) {
    return asset::append_transfer(paid, crypto::key_hash(bank_key.public_part), asset::InvoiceRef{"m0", "deposit-1"},
                                  merchant_key);
  }
};

// Hash-chain oracle built from the raw field layout rather than the codec.
Digest oracle_hash(const LedgerEntry& e) {
  std::string text = std::string("{\"kind\":\"") + std::string(entry_kind_name(e.kind)) + "\",\"nullifier\":" +
                     (e.nullifier ? "\"" + e.nullifier->value.hex() + "\"" : std::string("null")) +
                     ",\"recipient_id\":\"" + e.recipient_id + "\",\"amount\":" + std::to_string(e.amount) +
                     ",\"tick\":" + std::to_string(e.tick) + ",\"prev_hash\":\"" + e.prev_hash.hex() + "\"}";
  return crypto::sha256(text);
}

}  // namespace

TEST_CASE("clock and empty ledger") {
  MintFixture mint;
  crypto::RngStream rng(1, "v");
  Validator v("v0", crypto::generate_keypair(512, rng));
  Ledger l(LedgerConfig{1, 5, 10}, mint.directory, {{"v0", v.public_key()}});
  CHECK(l.current_tick() == 0);
  CHECK(l.tick() == 1);
  CHECK(l.tick() == 2);
  CHECK(l.ledger_digest() == Digest::zero());
  CHECK_THROWS_AS(Ledger(LedgerConfig{2, 5, 10}, mint.directory, {{"v0", v.public_key()}}), ProtocolError);
}

TEST_CASE("valid first spend yields a quorum certificate") {
  LedgerFixture f;
  SpendRequest req = f.pay(20);
  auto certs = submit_spend(*f.ledger, {req}, f.validators);
  REQUIRE(certs.size() == 1);
  CHECK(certs[0].acks.size() >= 2);
  CHECK(verify_certificate(certs[0], f.ledger->validators(), 2));
  REQUIRE(f.ledger->entries().size() == 1);
  const LedgerEntry& e = f.ledger->entries()[0];
  CHECK(e.kind == EntryKind::Spend);
  CHECK(e.recipient_id == "m0");
  CHECK(e.amount == 20);
  CHECK(e.entry_hash == certs[0].entry_hash);
  CHECK(f.ledger->ledger_digest() == e.entry_hash);

  auto n = asset::latest_nullifier(req.asset);
  Digest before = f.ledger->ledger_digest();
  CHECK(f.ledger->query_nullifier(n) == NullifierStatus{true, 5});
  CHECK(f.ledger->ledger_digest() == before);
  CHECK_FALSE(f.ledger->query_nullifier(asset::nullifier(req.asset.serial, 1)).spent);

  CHECK(error_of([&] { submit_spend(*f.ledger, {req}, f.validators); }) == ErrorCode::AlreadySpent);
  CHECK(f.ledger->entries().size() == 1);
}

TEST_CASE("certificate checks") {
  LedgerFixture f;
  auto certs = submit_spend(*f.ledger, {f.pay(10)}, f.validators);
  QuorumCertificate qc = certs[0];
  CHECK(verify_certificate(qc, f.ledger->validators(), 2));
  QuorumCertificate short_qc = qc;
  short_qc.acks.resize(1);
  CHECK_FALSE(verify_certificate(short_qc, f.ledger->validators(), 2));
  QuorumCertificate dup = qc;
  dup.acks[1] = dup.acks[0];
  CHECK_FALSE(verify_certificate(dup, f.ledger->validators(), 2));
  QuorumCertificate forged = qc;
  forged.acks[0].signature.value += 1;
  CHECK_FALSE(verify_certificate(forged, f.ledger->validators(), 2));
  CHECK(certificate_from_json(certificate_to_json(qc)) == qc);
}

TEST_CASE("spend rejections") {
  LedgerFixture f;
  SpendRequest hot = f.pay(5, "inv-h", 3);
  CHECK(error_of([&] { submit_spend(*f.ledger, {hot}, f.validators); }) == ErrorCode::HotAsset);
  f.ledger->tick();
  f.ledger->tick();
  f.ledger->tick();
  CHECK(submit_spend(*f.ledger, {hot}, f.validators).size() == 1);

  SpendRequest tampered = f.pay(5, "inv-t");
  tampered.asset.genesis_signature += 1;
  CHECK(error_of([&] { submit_spend(*f.ledger, {tampered}, f.validators); }) == ErrorCode::InvalidAsset);

  SpendRequest mismatched = f.pay(5, "inv-a");
  mismatched.invoice_ref.invoice_id = "inv-b";
  CHECK(error_of([&] { submit_spend(*f.ledger, {mismatched}, f.validators); }) == ErrorCode::InvalidAsset);

  SpendRequest twice = f.pay(1, "inv-d");
  CHECK(error_of([&] { submit_spend(*f.ledger, {twice, twice}, f.validators); }) == ErrorCode::AlreadySpent);
  CHECK(f.ledger->entries().size() == 1);
}

TEST_CASE("quorum under partitions") {
  LedgerFixture f;
  auto one_down = [](const std::string& id) { return id != "v2"; };
  CHECK(submit_spend(*f.ledger, {f.pay(10, "a")}, f.validators, one_down).size() == 1);
  auto two_down = [](const std::string& id) { return id == "v0"; };
  SpendRequest blocked = f.pay(10, "b");
  CHECK(error_of([&] { submit_spend(*f.ledger, {blocked}, f.validators, two_down); }) == ErrorCode::QuorumTimeout);
  CHECK(f.ledger->entries().size() == 1);
  // Released after the timeout: the same transfer can be retried.
  CHECK_FALSE(f.ledger->query_nullifier(asset::latest_nullifier(blocked.asset)).spent);
  CHECK(submit_spend(*f.ledger, {blocked}, f.validators).size() == 1);
}

TEST_CASE("batches are atomic and chained") {
  LedgerFixture f;
  auto certs = submit_spend(*f.ledger, {f.pay(20), f.pay(10), f.pay(5)}, f.validators);
  REQUIRE(certs.size() == 3);
  const auto& es = f.ledger->entries();
  REQUIRE(es.size() == 3);
  CHECK(es[1].prev_hash == es[0].entry_hash);
  CHECK(es[2].prev_hash == es[1].entry_hash);
  for (const auto& e : es) CHECK(oracle_hash(e) == e.entry_hash);
}

TEST_CASE("issue batches") {
  LedgerFixture f;
  Digest h1 = f.ledger->register_issue_batch("b0", {{50, 2}});
  REQUIRE(f.ledger->entries().size() == 1);
  CHECK(f.ledger->entries()[0].amount == 100);
  CHECK_FALSE(f.ledger->entries()[0].nullifier.has_value());
  Digest h2 = f.ledger->register_issue_batch("b0", {{1, 3}, {20, 1}});
  CHECK(f.ledger->entries()[1].prev_hash == h1);
  CHECK(f.ledger->entries()[1].amount == 23);
  CHECK(f.ledger->ledger_digest() == h2);
  CHECK(error_of([&] { f.ledger->register_issue_batch("nope", {{1, 1}}); }) == ErrorCode::UnknownBank);
}

TEST_CASE("redemptions") {
  LedgerFixture f;
  std::vector<SpendRequest> reqs = {f.pay(20, "r1"), f.pay(10, "r2"), f.pay(50, "r3")};
  submit_spend(*f.ledger, reqs, f.validators);
  std::vector<asset::Asset> deposited;
  for (const auto& r : reqs) deposited.push_back(f.to_bank(r.asset));

  auto hashes = f.ledger->register_redemption("b0", std::span(deposited).first(1));
  REQUIRE(hashes.size() == 1);
  CHECK(f.ledger->entries().back().kind == EntryKind::Redemption);
  CHECK(f.ledger->entries().back().amount == 20);
  CHECK(f.ledger->entries().back().recipient_id == "b0");
  CHECK(error_of([&] { f.ledger->register_redemption("b0", std::span(deposited).first(1)); }) ==
        ErrorCode::AlreadySpent);

  hashes = f.ledger->register_redemption("b0", std::span(deposited).subspan(1));
  CHECK(hashes.size() == 2);
  CHECK(verify_chain(f.ledger->entries()).ok);
  for (const auto& e : f.ledger->entries()) CHECK(oracle_hash(e) == e.entry_hash);

  // A deposit whose customer payment never reached the ledger is refused.
  SpendRequest unrecorded = f.pay(5, "r4");
  asset::Asset skipped = f.to_bank(unrecorded.asset);
  CHECK(error_of([&] { f.ledger->register_redemption("b0", std::span(&skipped, 1)); }) == ErrorCode::InvalidAsset);
  CHECK(error_of([&] { f.ledger->register_redemption("bx", std::span(&skipped, 1)); }) == ErrorCode::UnknownBank);
}

TEST_CASE("in-flight proposal is rebased by direct appends") {
  LedgerFixture f;
  SpendRequest req = f.pay(20);
  ProposalId id = f.ledger->submit_spend_batch({req});
  auto effects = f.ledger->drain_effects();
  REQUIRE(effects.size() == 1);
  AckRequest first = std::get<AckRequest>(effects[0]);
  CHECK(first.deadline == f.ledger->current_tick() + 10);

  // A second spend of the same transfer while the first is reserved.
  CHECK(error_of([&] { f.ledger->submit_spend_batch({req}); }) == ErrorCode::AlreadySpent);

  f.ledger->register_issue_batch("b0", {{10, 1}});
  effects = f.ledger->drain_effects();
  REQUIRE(effects.size() == 2);
  AckRequest second = std::get<AckRequest>(effects[1]);
  CHECK(second.round == 1);
  CHECK(second.entries[0].prev_hash == f.ledger->ledger_digest());

  for (auto& v : f.validators) f.ledger->on_ack(id, first.round, v.id(), *v.acknowledge(first.entries));
  CHECK(f.ledger->has_active_proposal());
  f.ledger->on_ack(id, second.round, "v0", *f.validators[0].acknowledge(second.entries));
  f.ledger->on_ack(id, second.round, "v1", *f.validators[1].acknowledge(second.entries));
  CHECK_FALSE(f.ledger->has_active_proposal());
  effects = f.ledger->drain_effects();
  REQUIRE(effects.size() == 2);
  auto outcome = std::get<SpendOutcome>(effects[1]);
  CHECK_FALSE(outcome.error);
  CHECK(verify_certificate(outcome.certificates[0], f.ledger->validators(), 2));
  CHECK(verify_chain(f.ledger->entries()).ok);
  f.ledger->on_deadline(id);
  CHECK(f.ledger->drain_effects().empty());
}

TEST_CASE("validators refuse nullifiers they have seen committed") {
  LedgerFixture f;
  SpendRequest req = f.pay(20);
  submit_spend(*f.ledger, {req}, f.validators);
  CHECK(f.validators[0].known_nullifiers() == 1);
  std::vector<LedgerEntry> replay = f.ledger->entries();
  replay[0].prev_hash = Digest::zero();
  replay[0].entry_hash = compute_entry_hash(replay[0]);
  CHECK_FALSE(f.validators[0].acknowledge(replay).has_value());
  LedgerEntry bad = replay[0];
  bad.amount += 1;
  Validator fresh("v9", f.merchant_key);
  CHECK_FALSE(fresh.acknowledge(std::span(&bad, 1)).has_value());
}

TEST_CASE("jsonl persistence replays to the same digest") {
  LedgerFixture f;
  f.ledger->register_issue_batch("b0", {{20, 1}, {10, 1}});
  auto reqs = std::vector<SpendRequest>{f.pay(20), f.pay(10)};
  submit_spend(*f.ledger, reqs, f.validators);
  auto path = std::filesystem::temp_directory_path() / "cbdc_ledger_test.jsonl";
  f.ledger->save_jsonl(path);
  auto replay = replay_jsonl(path);
  CHECK(replay.ok);
  CHECK(replay.entries == 3);
  CHECK(replay.digest == f.ledger->ledger_digest());

  std::ifstream in(path);
  std::stringstream buf;
  buf << in.rdbuf();
  std::string text = buf.str();
  auto pos = text.find("\"amount\":20");
  REQUIRE(pos != std::string::npos);
  text.replace(pos, 11, "\"amount\":21");
  std::ofstream(path, std::ios::trunc) << text;
  auto broken = replay_jsonl(path);
  CHECK_FALSE(broken.ok);
  CHECK(broken.error.find("entry_hash mismatch") != std::string::npos);
  std::filesystem::remove(path);
}

TEST_CASE("ledgers built from the same seed have equal digests") {
  auto run = [] {
    LedgerFixture f;
    f.ledger->register_issue_batch("b0", {{20, 1}});
    submit_spend(*f.ledger, {f.pay(20)}, f.validators);
    return f.ledger->ledger_digest();
  };
  CHECK(run() == run());
}
