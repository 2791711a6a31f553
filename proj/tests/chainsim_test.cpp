#include <gtest/gtest.h>

#include "hotmpc/chainsim/host.hpp"

using namespace hotmpc;
using namespace hotmpc::chainsim;

namespace {

template <class F>
Errc error_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return Errc::ConfigError;
}

KeyId key(std::uint8_t b) {
  ByteArray<32> a{};
  a.fill(b);
  return KeyId(a);
}

std::string payload_hex(std::string_view seed) { return to_hex(sha256(seed)); }

Bytes sig_bytes(const KeyPair& kp, const std::string& msg) {
  auto e = kp.sign(as_bytes(msg)).encode();
  return Bytes(e.begin(), e.end());
}

TEST(Deploy, AddressesResolveAndDiffer) {
  ChainHost host;
  auto a = host.deploy_policy("near", "passkey");
  auto b = host.deploy_policy("near", "passkey");
  EXPECT_NE(a, b);
  EXPECT_TRUE(host.deployed("near", a));
  EXPECT_EQ(host.policy("near", a).name(), "passkey");
  EXPECT_FALSE(host.deployed("ethereum", a));
  EXPECT_EQ(error_of([&] { host.hot_verify("near", "nothing.near", payload_hex("m"), key(1), {}); }),
            Errc::UnknownContract);
  EXPECT_EQ(error_of([&] { host.hot_verify("ethereum", a, payload_hex("m"), key(1), {}); }), Errc::UnknownContract);
  EXPECT_EQ(error_of([&] { host.hot_verify("dogechain", a, payload_hex("m"), key(1), {}); }), Errc::UnknownChain);
  EXPECT_EQ(error_of([&] { host.deploy_policy("dogechain", "passkey"); }), Errc::UnknownChain);
}

TEST(Passkey, SignatureGating) {
  Drbg rng(3);
  ChainHost host;
  auto addr = host.deploy_policy("near", "passkey");
  auto owner = KeyPair::generate(rng);
  auto other = KeyPair::generate(rng);
  host.register_key("near", addr, key(1), {owner.public_key});
  auto msg = payload_hex("transfer 1 btc");
  EXPECT_TRUE(host.hot_verify("near", addr, msg, key(1), sig_bytes(owner, msg)));
  EXPECT_FALSE(host.hot_verify("near", addr, msg, key(1), sig_bytes(other, msg)));
  EXPECT_FALSE(host.hot_verify("near", addr, msg, key(2), sig_bytes(owner, msg)));
  EXPECT_FALSE(host.hot_verify("near", addr, payload_hex("other"), key(1), sig_bytes(owner, msg)));
  EXPECT_FALSE(host.hot_verify("near", addr, msg, key(1), Bytes{1, 2, 3}));
}

TEST(Passkey, RebindRejected) {
  Drbg rng(4);
  ChainHost host;
  auto addr = host.deploy_policy("near", "passkey");
  auto a = KeyPair::generate(rng), b = KeyPair::generate(rng);
  host.register_key("near", addr, key(1), {a.public_key});
  EXPECT_EQ(error_of([&] { host.register_key("near", addr, key(1), {b.public_key}); }), Errc::AlreadyBound);
  auto msg = payload_hex("x");
  EXPECT_TRUE(host.hot_verify("near", addr, msg, key(1), sig_bytes(a, msg)));
  EXPECT_FALSE(host.hot_verify("near", addr, msg, key(1), sig_bytes(b, msg)));
}

TEST(TwoFactor, NeedsBothSignatures) {
  Drbg rng(5);
  ChainHost host;
  auto addr = host.deploy_policy("ethereum", "threshold-2fa");
  auto f1 = KeyPair::generate(rng), f2 = KeyPair::generate(rng);
  host.register_key("ethereum", addr, key(9), {f1.public_key, f2.public_key});
  auto msg = payload_hex("2fa");
  auto s1 = sig_bytes(f1, msg), s2 = sig_bytes(f2, msg);
  Bytes both = s1;
  both.insert(both.end(), s2.begin(), s2.end());
  Bytes swapped = s2;
  swapped.insert(swapped.end(), s1.begin(), s1.end());
  EXPECT_TRUE(host.hot_verify("ethereum", addr, msg, key(9), both));
  EXPECT_FALSE(host.hot_verify("ethereum", addr, msg, key(9), swapped));
  EXPECT_FALSE(host.hot_verify("ethereum", addr, msg, key(9), s1));
  EXPECT_EQ(error_of([&] { host.register_key("ethereum", addr, key(8), {f1.public_key}); }), Errc::MalformedRequest);
}

TEST(Policies, ConstantsParityPanic) {
  ChainHost host;
  auto t = host.deploy_policy("near", "always-true");
  auto f = host.deploy_policy("near", "always-false");
  auto p = host.deploy_policy("near", "parity");
  auto x = host.deploy_policy("near", "panic");
  EXPECT_TRUE(host.hot_verify("near", t, payload_hex("a"), key(1), {}));
  EXPECT_FALSE(host.hot_verify("near", f, payload_hex("a"), key(1), {}));
  EXPECT_EQ(error_of([&] { host.hot_verify("near", x, payload_hex("a"), key(1), {}); }), Errc::PolicyPanic);
  int accepted = 0;
  for (int i = 0; i < 400; ++i) {
    auto m = payload_hex("p" + std::to_string(i));
    bool want = (sha256(m)[0] % 2) == 0;
    bool got = host.hot_verify("near", p, m, key(1), {});
    EXPECT_EQ(got, want);
    accepted += got;
  }
  EXPECT_GT(accepted, 150);
  EXPECT_LT(accepted, 250);
  EXPECT_EQ(error_of([&] { host.deploy_policy("near", "no-such-policy"); }), Errc::ConfigError);
}

TEST(Policies, StateUnchangedByVerify) {
  // property: random calls never change any policy's state hash
  Drbg rng(11);
  ChainHost host;
  auto addr = host.deploy_policy("near", "passkey");
  std::vector<KeyPair> owners;
  for (std::uint8_t i = 0; i < 4; ++i) {
    owners.push_back(KeyPair::generate(rng));
    host.register_key("near", addr, key(i), {owners.back().public_key});
  }
  auto h0 = host.policy("near", addr).state_hash();
  for (int i = 0; i < 200; ++i) {
    auto k = static_cast<std::uint8_t>(rng.uniform(0, 5));
    auto msg = payload_hex("m" + std::to_string(rng.next_u64()));
    auto& signer = owners[rng.uniform(0, 3)];
    host.hot_verify("near", addr, msg, key(k), sig_bytes(signer, msg));
    ASSERT_EQ(host.policy("near", addr).state_hash(), h0);
  }
}

TEST(Host, SnapshotRoundTrip) {
  Drbg rng(6);
  ChainHost host;
  auto a = host.deploy_policy("near", "passkey");
  auto b = host.deploy_policy("solana", "threshold-2fa");
  host.deploy_policy("bitcoin", "always-false");
  auto kp = KeyPair::generate(rng), kq = KeyPair::generate(rng);
  host.register_key("near", a, key(1), {kp.public_key});
  host.register_key("solana", b, key(2), {kp.public_key, kq.public_key});
  auto back = ChainHost::from_json(nlohmann::json::parse(host.to_json().dump()));
  EXPECT_EQ(back.to_json(), host.to_json());
  auto msg = payload_hex("after reload");
  EXPECT_TRUE(back.hot_verify("near", a, msg, key(1), sig_bytes(kp, msg)));
  ChainHost copy = host;
  copy.register_key("near", a, key(3), {kq.public_key});
  EXPECT_NE(copy.to_json(), host.to_json());
}

TEST(Catalog, ListsBuiltins) {
  std::set<std::string> names;
  for (const auto& p : policy_catalog()) names.insert(p.name);
  for (auto n : {"passkey", "always-true", "always-false", "threshold-2fa"}) EXPECT_TRUE(names.contains(n));
  for (const auto& n : names) EXPECT_EQ(make_policy(n)->name(), n);
}

}  // namespace
