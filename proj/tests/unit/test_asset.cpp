#include <algorithm>
#include <numeric>
#include <set>

#include "doctest.h"

#include "cbdc/asset/codec.hpp"
#include "cbdc/asset/selection.hpp"
#include "cbdc/error.hpp"

using namespace cbdc;
using namespace cbdc::asset;
using crypto::RngStream;
using crypto::BigInt;
using crypto::SigningKeyPair;

namespace {

struct Fixture {
  RngStream rng{99, "asset-test"};
  std::map<Amount, SigningKeyPair> mint_keys;
  MintKeyDirectory directory;

  Fixture() {
    for (Amount d : kDefaultDenominations) {
      mint_keys[d] = crypto::generate_keypair(512, rng);
      directory[d] = mint_keys[d].public_part;
    }
  }

  // Issues directly with the mint key; the blinding step is covered by crypto tests.
  std::pair<Asset, SigningKeyPair> issue(Amount denom, Tick tick = 0) {
    SigningKeyPair owner = crypto::generate_keypair(512, rng);
    Asset a;
    a.serial = rng.bytes32();
    a.denomination = denom;
    a.genesis_owner_hash = crypto::key_hash(owner.public_part);
    auto commitment = genesis_commitment(a.serial, a.genesis_owner_hash);
    a.genesis_signature = crypto::blind_sign(crypto::message_representative(commitment, directory[denom]), mint_keys[denom]);
    a.issue_tick = tick;
    return {a, owner};
  }
};

Asset bare(Amount denom, std::uint8_t tag, Tick tick = 0) {
  Asset a;
  a.serial.fill(tag);
  a.denomination = denom;
  a.issue_tick = tick;
  return a;
}

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const ProtocolError& e) {
    return e.code();
  }
  FAIL("expected a ProtocolError");
  return ErrorCode::InvalidArgument;
}

}  // namespace

TEST_CASE("genesis commitment") {
  Serial s{};
  s.fill(7);
  auto owner = crypto::sha256("owner");
  CHECK(genesis_commitment(s, owner) == genesis_commitment(s, owner));
  Serial s2 = s;
  s2[31] ^= 1;
  CHECK(genesis_commitment(s2, owner) != genesis_commitment(s, owner));
  std::vector<std::uint8_t> short_serial(31);
  CHECK(code_of([&] { genesis_commitment(short_serial, owner); }) == ErrorCode::MalformedSerial);
}

TEST_CASE("nullifier matches reference SHA-256") {
  Serial s{};
  std::iota(s.begin(), s.end(), 0);
  // hashlib.sha256(bytes(range(32)) + i.to_bytes(8, 'big'))
  CHECK(nullifier(s, 0).value.hex() == "a9d6e500293a88bd38cbe213d07ab71f8cb2258552072a01bdf1c40be527f4d0");
  CHECK(nullifier(s, 1).value.hex() == "6061c4386d7a1788ba52e2e8b2ee6fe6137644ec75a70bf7042cfd67a1e57bd3");
  CHECK(nullifier(s, 0) == nullifier(s, 0));
  CHECK(nullifier(s, 0) != nullifier(s, 1));
}

TEST_CASE("nullifiers do not collide over a 10k-asset corpus") {
  RngStream rng(1, "nullifiers");
  std::set<Nullifier> seen;
  for (int i = 0; i < 10000; ++i) {
    Serial s = rng.bytes32();
    for (std::uint64_t idx = 0; idx < 2; ++idx) seen.insert(nullifier(s, idx));
  }
  CHECK(seen.size() == 20000);
}

TEST_CASE("issue, transfer and verify") {
  Fixture f;
  auto [asset, owner] = f.issue(20);
  CHECK(verify_asset(asset, f.directory).valid);

  auto merchant = crypto::generate_keypair(512, f.rng);
  auto bank = crypto::generate_keypair(512, f.rng);
  InvoiceRef ref{"m-1", "inv-1"};
  Asset paid = append_transfer(asset, crypto::key_hash(merchant.public_part), ref, owner);
  CHECK(asset.history.empty());
  REQUIRE(paid.history.size() == 1);
  CHECK(paid.history[0].index == 0);
  CHECK(verify_asset(paid, f.directory).valid);

  Asset redeemed = append_transfer(paid, crypto::key_hash(bank.public_part), InvoiceRef{"m-1", "deposit-1"}, merchant);
  REQUIRE(redeemed.history.size() == 2);
  CHECK(redeemed.history[1].index == 1);
  CHECK(redeemed.history[0] == paid.history[0]);
  CHECK(verify_asset(redeemed, f.directory).valid);
  CHECK(latest_nullifier(redeemed) == nullifier(redeemed.serial, 1));

  CHECK(code_of([&] { append_transfer(asset, crypto::key_hash(bank.public_part), std::nullopt, merchant); }) ==
        ErrorCode::WrongOwnerKey);
}

TEST_CASE("verification failures name the first failing check") {
  Fixture f;
  auto [asset, owner] = f.issue(10);
  auto merchant = crypto::generate_keypair(512, f.rng);
  auto bank = crypto::generate_keypair(512, f.rng);

  Asset tampered = asset;
  tampered.genesis_signature += 1;
  auto r = verify_asset(tampered, f.directory);
  CHECK_FALSE(r.valid);
  CHECK(r.first_failure == Check::GenesisSignature);

  Asset chained = append_transfer(append_transfer(asset, crypto::key_hash(merchant.public_part), std::nullopt, owner),
                                  crypto::key_hash(bank.public_part), std::nullopt, merchant);
  chained.history[1].index = 2;
  r = verify_asset(chained, f.directory);
  CHECK(r.first_failure == Check::IndexGap);

  Asset bad_link = append_transfer(asset, crypto::key_hash(merchant.public_part), std::nullopt, owner);
  bad_link.history[0].from_public_key = merchant.public_part;
  CHECK(verify_asset(bad_link, f.directory).first_failure == Check::ChainLinkage);

  Asset bad_sig = append_transfer(asset, crypto::key_hash(merchant.public_part), std::nullopt, owner);
  bad_sig.history[0].signature.value += 1;
  CHECK(verify_asset(bad_sig, f.directory).first_failure == Check::RecordSignature);
  CHECK(code_of([&] { append_transfer(bad_sig, crypto::key_hash(bank.public_part), std::nullopt, merchant); }) ==
        ErrorCode::UnverifiableAsset);

  Asset wrong_denom = asset;
  wrong_denom.denomination = 50;
  CHECK(verify_asset(wrong_denom, f.directory).first_failure == Check::GenesisSignature);
}

TEST_CASE("single-byte mutations break verification") {
  Fixture f;
  auto merchant = crypto::generate_keypair(512, f.rng);
  std::vector<Asset> corpus;
  for (Amount d : kDefaultDenominations) {
    auto [a, owner] = f.issue(d);
    corpus.push_back(append_transfer(a, crypto::key_hash(merchant.public_part), InvoiceRef{"m", "i"}, owner));
  }
  int mutations = 0;
  for (int i = 0; i < 1000; ++i) {
    Asset a = corpus[f.rng.uniform(0, corpus.size() - 1)];
    REQUIRE(verify_asset(a, f.directory).valid);
    std::uint8_t flip = static_cast<std::uint8_t>(f.rng.uniform(1, 255));
    switch (f.rng.uniform(0, 3)) {
      case 0: a.serial[f.rng.uniform(0, 31)] ^= flip; break;
      case 1: a.history[0].to_key_hash.bytes[f.rng.uniform(0, 31)] ^= flip; break;
      case 2: {
        BigInt mask = BigInt(static_cast<unsigned long>(flip)) << static_cast<mp_bitcnt_t>(8 * f.rng.uniform(0, 60));
        a.genesis_signature ^= mask;
        break;
      }
      default: {
        BigInt mask = BigInt(static_cast<unsigned long>(flip)) << static_cast<mp_bitcnt_t>(8 * f.rng.uniform(0, 60));
        a.history[0].signature.value ^= mask;
        break;
      }
    }
    CHECK_FALSE(verify_asset(a, f.directory).valid);
    ++mutations;
  }
  CHECK(mutations == 1000);
}

TEST_CASE("select_tokens worked examples") {
  std::vector<Asset> holdings = {bare(50, 1), bare(20, 2), bare(10, 3), bare(5, 4), bare(1, 5), bare(1, 6)};
  auto picked = select_tokens(holdings, 37, 10, 5);
  std::vector<Amount> denoms;
  for (const auto& a : picked) denoms.push_back(a.denomination);
  CHECK(denoms == std::vector<Amount>{20, 10, 5, 1, 1});

  std::vector<Asset> only50 = {bare(50, 1)};
  CHECK(code_of([&] { select_tokens(only50, 37, 10, 5); }) == ErrorCode::CannotMakeAmount);
  CHECK(code_of([&] { select_tokens(holdings, 0, 10, 5); }) == ErrorCode::InvalidArgument);

  // Largest-first takes the 50 and gets stuck; backtracking finds 20+20+20.
  std::vector<Asset> tricky = {bare(50, 1), bare(20, 2), bare(20, 3), bare(20, 4)};
  auto sel = select_tokens(tricky, 60, 10, 5);
  REQUIRE(sel.size() == 3);
  for (const auto& a : sel) CHECK(a.denomination == 20);
}

TEST_CASE("select_tokens skips hot assets and is order independent") {
  std::vector<Asset> holdings = {bare(20, 1, 8), bare(10, 2, 0), bare(10, 3, 0)};
  auto picked = select_tokens(holdings, 20, 10, 5);
  REQUIRE(picked.size() == 2);
  for (const auto& a : picked) CHECK(a.denomination == 10);
  std::vector<Asset> reversed(holdings.rbegin(), holdings.rend());
  CHECK(select_tokens(reversed, 20, 10, 5) == picked);
  CHECK(code_of([&] { select_tokens(holdings, 30, 10, 5); }) == ErrorCode::CannotMakeAmount);
}

TEST_CASE("select_tokens agrees with exhaustive subset-sum") {
  RngStream rng(17, "subset");
  for (int trial = 0; trial < 300; ++trial) {
    std::size_t n = rng.uniform(1, 12);
    std::vector<Asset> holdings;
    for (std::size_t i = 0; i < n; ++i) {
      Amount d = kDefaultDenominations[rng.uniform(0, 4)];
      holdings.push_back(bare(d, static_cast<std::uint8_t>(i), static_cast<Tick>(rng.uniform(0, 10))));
    }
    Amount amount = static_cast<Amount>(rng.uniform(1, 120));
    Tick now = 8, cooldown = 5;
    bool exists = false;
    for (std::uint32_t mask = 1; mask < (1u << n) && !exists; ++mask) {
      Amount sum = 0;
      bool ok = true;
      for (std::size_t i = 0; i < n; ++i)
        if (mask & (1u << i)) {
          ok = ok && is_cooled(holdings[i], now, cooldown);
          sum += holdings[i].denomination;
        }
      exists = ok && sum == amount;
    }
    try {
      auto picked = select_tokens(holdings, amount, now, cooldown);
      Amount sum = 0;
      for (const auto& a : picked) {
        sum += a.denomination;
        CHECK(is_cooled(a, now, cooldown));
      }
      CHECK(sum == amount);
      CHECK(exists);
    } catch (const ProtocolError& e) {
      CHECK(e.code() == ErrorCode::CannotMakeAmount);
      CHECK_FALSE(exists);
    }
  }
}

TEST_CASE("decompose_amount is greedy") {
  CHECK(decompose_amount(37, kDefaultDenominations) == std::vector<Amount>{20, 10, 5, 1, 1});
  CHECK(decompose_amount(100, kDefaultDenominations) == std::vector<Amount>{50, 50});
  CHECK_THROWS_AS(decompose_amount(0, kDefaultDenominations), ProtocolError);
}

TEST_CASE("asset JSON is canonical and roundtrips") {
  Fixture f;
  auto [asset, owner] = f.issue(5, 3);
  auto merchant = crypto::generate_keypair(512, f.rng);
  Asset paid = append_transfer(asset, crypto::key_hash(merchant.public_part), InvoiceRef{"m", "i"}, owner);
  Json j = asset_to_json(paid);
  std::vector<std::string> keys;
  for (auto it = j.begin(); it != j.end(); ++it) keys.push_back(it.key());
  CHECK(keys == std::vector<std::string>{"serial", "denomination", "genesis_owner_hash", "genesis_signature",
                                         "issue_tick", "history"});
  Asset back = asset_from_json(Json::parse(canonical_asset(paid)));
  CHECK(back == paid);
  CHECK(canonical_asset(back) == canonical_asset(paid));
  CHECK(verify_asset(back, f.directory).valid);
  Json broken = j;
  broken.erase("serial");
  CHECK_THROWS_AS(asset_from_json(broken), ProtocolError);
}
