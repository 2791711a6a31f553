#include <gtest/gtest.h>

#include "hotmpc/gatekeeper/gatekeeper.hpp"

using namespace hotmpc;
using namespace hotmpc::gatekeeper;
using node::BehaviorMode;
using node::Node;

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

// Direct in-process transport: every answer takes one time unit, silence
// costs the full timeout.
struct LocalNet : SignerTransport {
  Drbg rng{5};
  chainstate::Controller ctrl;
  chainstate::KeyRegistry registry;
  chainsim::ChainHost host;
  std::map<ParticipantId, Node> nodes;
  SimTime clock = 1;
  SimTime timeout = 10;
  std::vector<std::string> aborted;
  unsigned probes = 0;

  LocalNet(unsigned n, unsigned t, std::map<ParticipantId, std::string> behaviors = {}) {
    std::map<ParticipantId, KeyPair> enclaves;
    std::vector<chainstate::ParticipantRecord> recs;
    ParticipantList ids;
    for (ParticipantId id = 1; id <= n; ++id) {
      ids.push_back(id);
      enclaves.emplace(id, KeyPair::generate(rng));
      recs.push_back({id, "", "", enclaves.at(id).public_key, 0});
    }
    ctrl = chainstate::Controller::genesis({recs, t, {}});
    auto shares = crypto::run_dkg<Group>(t, ids, rng);
    for (auto id : ids) {
      auto b = behaviors.contains(id) ? BehaviorMode::parse(behaviors.at(id)) : BehaviorMode{};
      auto node = Node::init(id, enclaves.at(id), b, ctrl, 0);
      node.install_share(shares.at(id), 0, "dkg", node::kDkgComplete, 0);
      nodes.emplace(id, std::move(node));
    }
    ctrl.report_root_key(shares.begin()->second.public_package());
  }

  SimTime now() const override { return clock; }
  const chainstate::Controller& controller() const override { return ctrl; }

  template <class R, class F>
  std::map<ParticipantId, Reply<R>> exchange(const ParticipantList& signers, F&& call) {
    std::map<ParticipantId, Reply<R>> out;
    SimTime slowest = 0;
    for (auto id : signers) {
      R r = call(nodes.at(id));
      SimTime lat = std::holds_alternative<std::monostate>(r) ? timeout : 1;
      slowest = std::max(slowest, lat);
      out.emplace(id, Reply<R>{std::move(r), lat});
    }
    clock += slowest;
    return out;
  }

  std::map<ParticipantId, Reply<node::Round1Reply>> round1(const Receipt& r, const std::string& session,
                                                          const ParticipantList& signers) override {
    node::ChainView view{ctrl, registry, host};
    return exchange<node::Round1Reply>(
        signers, [&](Node& n) { return n.handle_sign_request(r, session, signers, clock, view, rng); });
  }
  std::map<ParticipantId, Reply<node::Round2Reply>> round2(const std::string& session, const ParticipantList& signers,
                                                          const crypto::CommitmentList<Group>& c) override {
    return exchange<node::Round2Reply>(signers, [&](Node& n) { return n.handle_round2(session, c, clock); });
  }
  void abort(const std::string& session, const ParticipantList& recipients, const ParticipantList& unavailable) override {
    aborted.push_back(session);
    for (auto id : recipients) nodes.at(id).handle_abort(session, unavailable, clock);
  }
  bool probe(const ParticipantList& ids) override {
    ++probes;
    return std::all_of(ids.begin(), ids.end(), [&](ParticipantId id) { return nodes.at(id).ping(); });
  }
};

struct Rig {
  LocalNet net;
  Gatekeeper gk;
  KeyPair owner;
  KeyId key_id;
  std::string contract;

  Rig(unsigned n, unsigned t, std::map<ParticipantId, std::string> behaviors = {}, std::uint32_t capacity = 10,
        GatekeeperBehavior gb = GatekeeperBehavior::Honest)
      : net(n, t, std::move(behaviors)),
        gk(GatekeeperConfig{"gk-1", capacity, 100, 50, 10, 3, 200, gb, 1}, KeyPair::generate(net.rng)) {
    net.ctrl.approve_gatekeeper({"gk-1", gk.public_key(), capacity, 100, true});
    contract = net.host.deploy_policy("near", "passkey");
    key_id = net.registry.reserve_key("near", contract);
    owner = KeyPair::generate(net.rng);
    net.host.register_key("near", contract, key_id, {owner.public_key});
  }

  SignRequest request(std::string_view msg, bool authorized = true) {
    SignRequest req;
    req.key_id = key_id;
    req.message = sha256(msg);
    req.target_chain = "bitcoin";
    auto signer = authorized ? owner : KeyPair::generate(net.rng);
    auto sig = signer.sign(as_bytes(to_hex(req.message))).encode();
    req.metadata.assign(sig.begin(), sig.end());
    return req;
  }

  PublicKey child() const { return crypto::derive_child_public(net.ctrl.root_package()->group_public_key, key_id); }
};

TEST(Submit, HealthyNetworkSigns) {
  Rig s(5, 3);
  auto req = s.request("hello");
  auto res = s.gk.submit(req, s.net);
  EXPECT_TRUE(crypto::verify(req.message, res.signature, s.child()));
  EXPECT_EQ(res.attempts, 1u);
  EXPECT_EQ(res.signers.size(), 3u);
  EXPECT_EQ(s.gk.receipt_log().size(), 1u);
  EXPECT_TRUE(s.gk.receipt_log()[0].verify(s.gk.public_key()));
}

TEST(Submit, QuotaExceededNeverReachesNodes) {
  Rig s(5, 3, {}, 2);
  s.gk.submit(s.request("1"), s.net);
  s.gk.submit(s.request("2"), s.net);
  std::size_t log_sizes = 0;
  for (auto& [id, n] : s.net.nodes) log_sizes += n.log().size();
  EXPECT_EQ(error_of([&] { s.gk.submit(s.request("3"), s.net); }), Errc::QuotaExceeded);
  std::size_t after = 0;
  for (auto& [id, n] : s.net.nodes) after += n.log().size();
  EXPECT_EQ(after, log_sizes);
  EXPECT_EQ(s.gk.receipt_log().size(), 2u);
  s.net.clock = 100;  // next window
  for (auto& [id, n] : s.net.nodes) s.net.ctrl.record_attestation(*n.attest(s.net.ctrl.params().code_hash, 100), 100);
  EXPECT_NO_THROW(s.gk.submit(s.request("4"), s.net));
}

TEST(Submit, TwoStallersOfFive) {
  Rig s(5, 3, {{1, "stall"}, {2, "stall"}});
  auto req = s.request("uncooperative");
  auto res = s.gk.submit(req, s.net);
  EXPECT_TRUE(crypto::verify(req.message, res.signature, s.child()));
  EXPECT_EQ(res.signers, (ParticipantList{3, 4, 5}));
  auto listed = s.gk.blacklist().active(s.net.now());
  EXPECT_TRUE(std::find(listed.begin(), listed.end(), 1u) != listed.end());
  EXPECT_TRUE(std::find(listed.begin(), listed.end(), 2u) != listed.end());
}

TEST(Submit, ThreeStallersOfFiveUnavailable) {
  Rig s(5, 3, {{1, "stall"}, {2, "stall"}, {3, "stall"}});
  EXPECT_EQ(error_of([&] { s.gk.submit(s.request("x"), s.net); }), Errc::ThresholdUnavailable);
}

TEST(Submit, RefusingNodeIsReplacedAndReported) {
  Rig s(4, 3, {{2, "refuse-signing"}});
  for (int i = 0; i < 4; ++i) {
    auto res = s.gk.submit(s.request("r" + std::to_string(i)), s.net);
    EXPECT_EQ(std::count(res.signers.begin(), res.signers.end(), 2u), 0);
  }
  // each time node 2 was asked, both co-signers recorded it as unavailable
  std::size_t asked = 0;
  for (const auto& e : s.net.nodes.at(2).log().entries()) asked += e.as<node::event::SigningRequestReceived>() != nullptr;
  std::size_t reported = 0;
  for (auto& [id, n] : s.net.nodes)
    for (const auto& e : n.log().entries())
      if (auto* u = e.as<node::event::NodeUnavailable>(); u && u->peer == 2) ++reported;
  EXPECT_GE(asked, 1u);
  EXPECT_EQ(reported, 2 * asked);
}

TEST(Submit, CorruptShareBlacklisted) {
  Rig s(3, 3, {{2, "corrupt-share"}});
  EXPECT_EQ(error_of([&] { s.gk.submit(s.request("c"), s.net); }), Errc::ThresholdUnavailable);
  auto listed = s.gk.blacklist().active(s.net.now());
  EXPECT_EQ(listed, ParticipantList{2});
}

TEST(Submit, UnauthorizedPropagates) {
  Rig s(5, 3);
  EXPECT_EQ(error_of([&] { s.gk.submit(s.request("bad", false), s.net); }), Errc::Unauthorized);
  for (auto& [id, n] : s.net.nodes) EXPECT_TRUE(node::audit_gating(n.log().entries()).empty());
  EXPECT_TRUE(s.gk.blacklist().active(s.net.now()).empty());
}

TEST(Submit, MalformedRequests) {
  Rig s(3, 2);
  auto req = s.request("m");
  req.scheme = std::string(kSchemeEcdsa);
  EXPECT_EQ(error_of([&] { s.gk.submit(req, s.net); }), Errc::MalformedRequest);
  req.scheme = "rsa";
  EXPECT_EQ(error_of([&] { s.gk.submit(req, s.net); }), Errc::MalformedRequest);
  req = s.request("m");
  req.target_chain = "";
  EXPECT_EQ(error_of([&] { s.gk.submit(req, s.net); }), Errc::MalformedRequest);
  EXPECT_TRUE(s.gk.receipt_log().empty());
}

TEST(Submit, IgnoreQuotaGatekeeperIsStoppedByNodes) {
  Rig s(5, 3, {}, 2, GatekeeperBehavior::IgnoreQuota);
  s.gk.submit(s.request("1"), s.net);
  s.gk.submit(s.request("2"), s.net);
  EXPECT_EQ(error_of([&] { s.gk.submit(s.request("3"), s.net); }), Errc::QuotaViolation);
  EXPECT_EQ(s.gk.receipt_log().size(), 3u);
}

TEST(Submit, OfflineGatekeeper) {
  Rig s(3, 2, {}, 10, GatekeeperBehavior::Offline);
  EXPECT_EQ(error_of([&] { s.gk.submit(s.request("1"), s.net); }), Errc::Timeout);
}

TEST(Selection, FirstTByScoreThenSeededTieBreak) {
  ResponsivenessScores sc;
  Blacklist bl;
  ParticipantList all{1, 2, 3, 4, 5};
  auto a = select_signers(all, 3, sc, bl, 0, 7);
  EXPECT_EQ(a, select_signers(all, 3, sc, bl, 0, 7));
  EXPECT_EQ(a.size(), 3u);
  sc.observe(1, 1);
  sc.observe(2, 9);
  sc.observe(3, 2);
  sc.observe(4, 3);
  sc.observe(5, 8);
  EXPECT_EQ(select_signers(all, 3, sc, bl, 0, 7), (ParticipantList{1, 3, 4}));
  bl.add(3, 10);
  EXPECT_EQ(select_signers(all, 3, sc, bl, 5, 7), (ParticipantList{1, 4, 5}));
  EXPECT_EQ(select_signers(all, 3, sc, bl, 10, 7), (ParticipantList{1, 3, 4}));  // expired
  EXPECT_EQ(error_of([&] { select_signers({1, 2}, 3, sc, bl, 0, 7); }), Errc::ThresholdUnavailable);
  // different seeds spread ties
  ResponsivenessScores fresh;
  std::set<ParticipantList> seen;
  for (std::uint64_t seed = 0; seed < 20; ++seed) seen.insert(select_signers(all, 3, fresh, bl, 20, seed));
  EXPECT_GT(seen.size(), 1u);
}

TEST(Selection, EwmaDecayHalf) {
  ResponsivenessScores sc;
  sc.observe(1, 8);
  EXPECT_DOUBLE_EQ(sc.score(1), 8);
  sc.observe(1, 2);
  EXPECT_DOUBLE_EQ(sc.score(1), 5);
  sc.observe(1, 1);
  EXPECT_DOUBLE_EQ(sc.score(1), 3);
  EXPECT_DOUBLE_EQ(sc.score(9), 0);
}

TEST(Quota, FixedWindow) {
  FixedWindowQuota q(2, 100);
  EXPECT_TRUE(q.try_admit(0));
  EXPECT_TRUE(q.try_admit(99));
  EXPECT_FALSE(q.try_admit(99));
  EXPECT_TRUE(q.try_admit(100));
  EXPECT_EQ(q.used(150), 1u);
  EXPECT_EQ(q.used(200), 0u);
}

TEST(Quota, NeverExceedsCapacityProperty) {
  Drbg rng(17);
  for (int trial = 0; trial < 50; ++trial) {
    auto cap = static_cast<std::uint32_t>(rng.uniform(1, 5));
    SimTime window = rng.uniform(5, 50);
    FixedWindowQuota q(cap, window);
    std::map<SimTime, std::uint32_t> per_window;
    SimTime now = 0;
    for (int i = 0; i < 200; ++i) {
      now += rng.uniform(0, 7);
      if (q.try_admit(now)) ++per_window[now / window];
    }
    for (const auto& [w, n] : per_window) ASSERT_LE(n, cap);
  }
}

TEST(GroupTesting, OneStallerAmongFourInTwoRounds) {
  for (ParticipantId bad = 1; bad <= 4; ++bad) {
    auto res = group_test({1, 2, 3, 4}, [&](const ParticipantList& s) {
      return std::find(s.begin(), s.end(), bad) == s.end();
    });
    EXPECT_EQ(res.defectives, ParticipantList{bad});
    EXPECT_LE(res.rounds, 2u);
  }
}

TEST(GroupTesting, FindsEveryDefectiveSubset) {
  // exhaustive over subsets of 1..7
  ParticipantList all{1, 2, 3, 4, 5, 6, 7};
  for (unsigned mask = 0; mask < 128; ++mask) {
    ParticipantList want;
    for (unsigned i = 0; i < 7; ++i)
      if (mask & (1u << i)) want.push_back(all[i]);
    auto res = group_test(all, [&](const ParticipantList& s) {
      for (auto id : s)
        if (std::find(want.begin(), want.end(), id) != want.end()) return false;
      return true;
    });
    ASSERT_EQ(res.defectives, want) << mask;
    ASSERT_LE(res.rounds, 3u);
  }
}

TEST(HealthCheck, RehabilitatesRecoveredNodes) {
  Rig s(5, 3, {{1, "stall"}, {2, "stall"}});
  s.gk.submit(s.request("a"), s.net);
  ASSERT_EQ(s.gk.blacklist().active(s.net.now()).size(), 2u);
  s.net.nodes.at(1).set_behavior({});
  auto res = s.gk.health_check({1, 2}, s.net);
  EXPECT_EQ(res.defectives, ParticipantList{2});
  EXPECT_EQ(s.gk.blacklist().active(s.net.now()), ParticipantList{2});
}

TEST(Receipts, TamperDetected) {
  Rig s(3, 2);
  s.gk.submit(s.request("r"), s.net);
  auto r = s.gk.receipt_log()[0];
  EXPECT_TRUE(r.verify(s.gk.public_key()));
  auto t = r;
  t.deadline += 1;
  EXPECT_FALSE(t.verify(s.gk.public_key()));
  t = r;
  t.request.metadata.push_back(0);
  EXPECT_FALSE(t.verify(s.gk.public_key()));
  // node logs carry the identical receipt
  bool joined = false;
  for (auto& [id, n] : s.net.nodes)
    for (const auto& e : n.log().entries())
      if (auto* rr = e.as<node::event::SigningRequestReceived>(); rr && rr->receipt.hash() == r.hash()) joined = true;
  EXPECT_TRUE(joined);
  auto back = nlohmann::json(r).get<Receipt>();
  EXPECT_EQ(back, r);
}

TEST(Snapshot, GatekeeperRoundTrip) {
  Rig s(5, 3, {{1, "stall"}});
  s.gk.submit(s.request("a"), s.net);
  auto j = s.gk.to_json();
  EXPECT_EQ(Gatekeeper::from_json(j).to_json(), j);
}

}  // namespace
