#include <gtest/gtest.h>

#include <set>

#include "hotmpc/chainstate/controller.hpp"
#include "hotmpc/chainstate/registry.hpp"

using namespace hotmpc;
using namespace hotmpc::chainstate;

namespace {

struct Fixture {
  Drbg rng{7};
  std::map<ParticipantId, KeyPair> enclaves;

  ParticipantRecord record(ParticipantId id) {
    auto kp = KeyPair::generate(rng);
    enclaves.insert_or_assign(id, kp);
    return {id, "addr-" + std::to_string(id), "enc-" + std::to_string(id), kp.public_key, 0};
  }
  std::vector<ParticipantRecord> records(std::initializer_list<ParticipantId> ids) {
    std::vector<ParticipantRecord> out;
    for (auto id : ids) out.push_back(record(id));
    return out;
  }
  Controller genesis(std::initializer_list<ParticipantId> ids, unsigned t) {
    return Controller::genesis({records(ids), t, {}});
  }
};

PublicKeyPackage package_for(const ParticipantList& ids, unsigned t, Drbg& rng) {
  auto shares = crypto::run_dkg<Group>(t, ids, rng);
  return shares.begin()->second.public_package();
}

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

TEST(Genesis, FiveParticipantsThresholdThree) {
  Fixture fx;
  auto c = fx.genesis({1, 2, 3, 4, 5}, 3);
  auto cfg = c.fetch_config();
  EXPECT_EQ(cfg.epoch, 0u);
  EXPECT_EQ(cfg.threshold, 3u);
  EXPECT_EQ(cfg.participant_ids(), (ParticipantList{1, 2, 3, 4, 5}));
  EXPECT_FALSE(cfg.pending_proposal.has_value());
}

TEST(Genesis, InvalidConfigs) {
  Fixture fx;
  EXPECT_EQ(error_of([&] { Controller::genesis({{}, 1, {}}); }), Errc::InvalidConfig);
  EXPECT_EQ(error_of([&] { fx.genesis({1, 2}, 3); }), Errc::InvalidConfig);
  EXPECT_EQ(error_of([&] { fx.genesis({1, 2}, 0); }), Errc::InvalidConfig);
  EXPECT_EQ(error_of([&] { fx.genesis({1, 1}, 1); }), Errc::InvalidConfig);
  EXPECT_EQ(error_of([&] { fx.genesis({0, 1}, 1); }), Errc::InvalidConfig);
}

TEST(Genesis, SnapshotRoundTrip) {
  Fixture fx;
  auto c = fx.genesis({1, 2, 3, 4, 5}, 3);
  c.approve_gatekeeper({"gk-a", KeyPair::generate(fx.rng).public_key, 10, 100, true});
  c.report_root_key(package_for({1, 2, 3, 4, 5}, 3, fx.rng));
  auto pid = c.propose_config(1, fx.records({1, 2, 3, 4}), 3);
  c.vote(2, pid);
  auto text = c.to_json().dump();
  auto back = Controller::from_json(nlohmann::json::parse(text));
  EXPECT_EQ(back, c);
  EXPECT_EQ(back.to_json().dump(), text);
}

TEST(FetchConfig, HistoryAndUnknownEpoch) {
  Fixture fx;
  ParticipantList ids{1, 2, 3, 4, 5};
  auto real = crypto::run_dkg<Group>(3, ids, fx.rng);
  Controller c = fx.genesis({1, 2, 3, 4, 5}, 3);
  c.report_root_key(real.begin()->second.public_package());
  auto pid = c.propose_config(1, fx.records({1, 2, 3, 4}), 2);
  for (ParticipantId v : {1, 2, 3}) c.vote(v, pid);
  ASSERT_TRUE(c.finalize());
  EXPECT_EQ(c.epoch(), 0u);  // advances only once resharing completes
  std::vector<KeyShare> old;
  for (auto& [id, s] : real) old.push_back(s);
  auto fresh = crypto::reshare<Group>(std::span<const KeyShare>(old), 2, ParticipantList{1, 2, 3, 4}, fx.rng);
  c.complete_reshare(pid, fresh.begin()->second.public_package());
  EXPECT_EQ(c.epoch(), 1u);
  EXPECT_EQ(c.fetch_config().threshold, 2u);
  EXPECT_EQ(c.fetch_config(0).threshold, 3u);
  EXPECT_EQ(error_of([&] { c.fetch_config(99); }), Errc::UnknownEpoch);
}

TEST(Voting, MajorityOfFive) {
  Fixture fx;
  auto c = fx.genesis({1, 2, 3, 4, 5}, 3);
  auto pid = c.propose_config(1, fx.records({1, 2, 3, 4, 5, 6}), 4);
  c.vote(1, pid);
  c.vote(2, pid);
  EXPECT_FALSE(c.finalize().has_value());
  c.vote(3, pid);
  auto trig = c.finalize();
  ASSERT_TRUE(trig);
  EXPECT_EQ(trig->from_epoch, 0u);
  EXPECT_EQ(trig->old_participants, (ParticipantList{1, 2, 3, 4, 5}));
  EXPECT_EQ(trig->new_participants, (ParticipantList{1, 2, 3, 4, 5, 6}));
  EXPECT_EQ(trig->new_threshold, 4u);
}

TEST(Voting, MajorityRuleMatchesCountingOracle) {
  // votes > n/2, brute force over n and vote counts
  for (ParticipantId n = 1; n <= 7; ++n) {
    for (unsigned k = 0; k <= n; ++k) {
      Fixture fx;
      std::vector<ParticipantRecord> recs;
      for (ParticipantId i = 1; i <= n; ++i) recs.push_back(fx.record(i));
      auto c = Controller::genesis({recs, 1, {}});
      auto pid = c.propose_config(1, recs, 1);
      for (ParticipantId v = 1; v <= k; ++v) c.vote(v, pid);
      EXPECT_EQ(c.finalize().has_value(), 2 * k > n) << n << " " << k;
    }
  }
}

TEST(Voting, Errors) {
  Fixture fx;
  auto c = fx.genesis({1, 2, 3, 4, 5}, 3);
  EXPECT_EQ(error_of([&] { c.vote(1, 1); }), Errc::NoActiveProposal);
  EXPECT_EQ(error_of([&] { c.finalize(); }), Errc::NoActiveProposal);
  EXPECT_EQ(error_of([&] { c.propose_config(9, fx.records({1, 2}), 1); }), Errc::NotParticipant);
  auto pid = c.propose_config(1, fx.records({1, 2, 3}), 2);
  EXPECT_EQ(error_of([&] { c.vote(9, pid); }), Errc::NotParticipant);
  c.vote(1, pid);
  EXPECT_EQ(error_of([&] { c.vote(1, pid); }), Errc::DuplicateVote);
  EXPECT_EQ(error_of([&] { c.vote(2, pid + 1); }), Errc::NoActiveProposal);
  EXPECT_EQ(error_of([&] { c.complete_reshare(pid, PublicKeyPackage{}); }), Errc::NoActiveProposal);
}

TEST(Voting, ResharedKeyMustKeepRoot) {
  Fixture fx;
  ParticipantList ids{1, 2, 3};
  auto c = fx.genesis({1, 2, 3}, 2);
  c.report_root_key(package_for(ids, 2, fx.rng));
  auto pid = c.propose_config(1, fx.records({1, 2, 3}), 2);
  c.vote(1, pid);
  c.vote(2, pid);
  ASSERT_TRUE(c.finalize());
  EXPECT_EQ(error_of([&] { c.complete_reshare(pid, package_for(ids, 2, fx.rng)); }), Errc::MixedPublicKeys);
  EXPECT_EQ(c.epoch(), 0u);
}

TEST(Attestation, ExtendsExpiry) {
  Fixture fx;
  auto c = fx.genesis({1, 2, 3}, 2);
  auto st = AttestationStatement::make(2, default_code_hash(), 10, fx.enclaves.at(2));
  EXPECT_EQ(c.record_attestation(st, 10), 110u);
  EXPECT_EQ(c.fetch_config().find(2)->attestation_expiry, 110u);
  EXPECT_TRUE(c.is_eligible(2, 110));
  EXPECT_FALSE(c.is_eligible(2, 111));
  EXPECT_FALSE(c.is_eligible(1, 1));
  EXPECT_EQ(c.eligible_participants(50), ParticipantList{2});
}

TEST(Attestation, Rejections) {
  Fixture fx;
  auto c = fx.genesis({1, 2, 3}, 2);
  auto wrong_hash = sha256(std::string_view("patched-binary"));
  EXPECT_EQ(error_of([&] { c.record_attestation(AttestationStatement::make(1, wrong_hash, 0, fx.enclaves.at(1)), 0); }),
            Errc::CodeIdentityMismatch);
  EXPECT_EQ(
      error_of([&] { c.record_attestation(AttestationStatement::make(1, default_code_hash(), 0, fx.enclaves.at(2)), 0); }),
      Errc::BadSignature);
  auto st = AttestationStatement::make(1, default_code_hash(), 0, fx.enclaves.at(1));
  st.timestamp = 5;  // signature no longer covers the statement
  EXPECT_EQ(error_of([&] { c.record_attestation(st, 5); }), Errc::BadSignature);
  EXPECT_EQ(
      error_of([&] { c.record_attestation(AttestationStatement::make(7, default_code_hash(), 0, fx.enclaves.at(1)), 0); }),
      Errc::UnknownParticipant);
}

TEST(Attestation, JoinerMayAttestBeforeActivation) {
  Fixture fx;
  auto c = fx.genesis({1, 2, 3}, 2);
  c.propose_config(1, fx.records({1, 2, 3, 4}), 3);
  auto st = AttestationStatement::make(4, default_code_hash(), 0, fx.enclaves.at(4));
  EXPECT_EQ(c.record_attestation(st, 0), 100u);
  EXPECT_FALSE(c.is_eligible(4, 0));  // not active yet
}

TEST(Gatekeepers, ApproveRemove) {
  Fixture fx;
  auto c = fx.genesis({1}, 1);
  auto pk = KeyPair::generate(fx.rng).public_key;
  c.approve_gatekeeper({"gk", pk, 5, 100, true});
  ASSERT_TRUE(c.gatekeeper("gk"));
  EXPECT_TRUE(c.gatekeeper("gk")->active);
  c.remove_gatekeeper("gk");
  EXPECT_FALSE(c.gatekeeper("gk")->active);
  EXPECT_FALSE(c.gatekeeper("other"));
  EXPECT_EQ(error_of([&] { c.remove_gatekeeper("other"); }), Errc::UnknownGatekeeper);
  EXPECT_EQ(error_of([&] { c.approve_gatekeeper({"x", pk, 0, 100, true}); }), Errc::InvalidConfig);
}

TEST(Registry, ReserveLookup) {
  KeyRegistry r;
  auto id = r.reserve_key("near", "wallet.near");
  const auto& e = r.lookup_authorizer(id);
  EXPECT_EQ(e.chain_id, "near");
  EXPECT_EQ(e.contract_address, "wallet.near");
  EXPECT_EQ(e.key_id, id);
}

TEST(Registry, OneContractManyKeys) {
  KeyRegistry r;
  std::set<KeyId> ids;
  for (int i = 0; i < 50; ++i) ids.insert(r.reserve_key("near", "wallet.near"));
  EXPECT_EQ(ids.size(), 50u);
  for (const auto& id : ids) EXPECT_EQ(r.lookup_authorizer(id).contract_address, "wallet.near");
}

TEST(Registry, KeyIdFormatOracle) {
  KeyRegistry r;
  r.reserve_key("a", "b");
  auto id = r.reserve_key("eth", "0xabc");
  // independent encoding: tag, then length-prefixed fields, then counter 1
  Bytes buf;
  auto put_str = [&](std::string_view s) {
    for (int i = 7; i >= 0; --i) buf.push_back(static_cast<std::uint8_t>(std::uint64_t(s.size()) >> (8 * i)));
    buf.insert(buf.end(), s.begin(), s.end());
  };
  put_str("HOTMPC-v1/key-id");
  put_str("eth");
  put_str("0xabc");
  for (int i = 0; i < 7; ++i) buf.push_back(0);
  buf.push_back(1);
  EXPECT_EQ(id.bytes(), sha256(buf));
}

TEST(Registry, UnknownAndMalformed) {
  KeyRegistry r;
  KeyId missing{};
  EXPECT_EQ(error_of([&] { r.lookup_authorizer(missing); }), Errc::UnknownKeyId);
  EXPECT_EQ(error_of([&] { r.reserve_key("", "x"); }), Errc::MalformedRequest);
}

TEST(Registry, AppendOnlyUnderRandomOps) {
  // property: every binding ever returned stays identical
  Drbg rng(42);
  KeyRegistry r;
  std::map<KeyId, std::pair<std::string, std::string>> seen;
  for (int step = 0; step < 300; ++step) {
    auto chain = "chain-" + std::to_string(rng.uniform(0, 3));
    auto contract = "c-" + std::to_string(rng.uniform(0, 5));
    auto id = r.reserve_key(chain, contract);
    ASSERT_FALSE(seen.contains(id));
    seen.emplace(id, std::make_pair(chain, contract));
    for (const auto& [k, v] : seen) {
      const auto& e = r.lookup_authorizer(k);
      ASSERT_EQ(e.chain_id, v.first);
      ASSERT_EQ(e.contract_address, v.second);
    }
  }
  auto back = KeyRegistry::from_json(r.to_json());
  EXPECT_EQ(back.to_json(), r.to_json());
}

}  // namespace
