#include <gtest/gtest.h>

#include "hotmpc/node/node.hpp"

using namespace hotmpc;
using namespace hotmpc::node;
using gatekeeper::Receipt;
using gatekeeper::SignRequest;

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

// Five nodes, t = 3, one passkey contract and one approved gatekeeper, with
// the DKG run through the node interface.
struct Net {
  Drbg rng{99};
  chainstate::Controller controller;
  chainstate::KeyRegistry registry;
  chainsim::ChainHost host;
  std::map<ParticipantId, Node> nodes;
  KeyPair gk_key;
  KeyPair owner;
  std::string contract;
  KeyId key_id;
  std::uint64_t serial = 0;
  unsigned t = 3;

  explicit Net(std::map<ParticipantId, BehaviorMode> behaviors = {}, std::uint32_t capacity = 100) {
    ParticipantList ids{1, 2, 3, 4, 5};
    std::map<ParticipantId, KeyPair> enclaves;
    std::vector<chainstate::ParticipantRecord> recs;
    for (auto id : ids) {
      enclaves.emplace(id, KeyPair::generate(rng));
      recs.push_back({id, "n" + std::to_string(id), "", enclaves.at(id).public_key, 0});
    }
    controller = chainstate::Controller::genesis({recs, t, {}});
    for (auto id : ids) {
      auto b = behaviors.contains(id) ? behaviors.at(id) : BehaviorMode{};
      nodes.emplace(id, Node::init(id, enclaves.at(id), b, controller, 0));
    }
    run_dkg(ids);
    gk_key = KeyPair::generate(rng);
    controller.approve_gatekeeper({"gk", gk_key.public_key, capacity, 100, true});
    contract = host.deploy_policy("near", "passkey");
    key_id = registry.reserve_key("near", contract);
    owner = KeyPair::generate(rng);
    host.register_key("near", contract, key_id, {owner.public_key});
  }

  void run_dkg(const ParticipantList& ids) {
    std::map<ParticipantId, crypto::DkgRound1<Group>> r1;
    for (auto& [id, n] : nodes) {
      n.arm(false);
      auto child = rng.fork("dkg" + std::to_string(id));
      r1.emplace(id, *n.dkg_round1("dkg", t, ids, 0, child));
    }
    for (auto& [id, n] : nodes) {
      std::map<ParticipantId, crypto::DealerMessage<Group>> inbox;
      for (auto& [d, m] : r1) inbox.emplace(d, crypto::DealerMessage<Group>{m.broadcast, m.directed_shares.at(id)});
      auto res = n.dkg_round2("dkg", r1.at(id).state, inbox, 0);
      n.install_share(std::get<KeyShare>(res), 0, "dkg", kDkgComplete, 0);
      n.arm(true);
    }
    controller.report_root_key(nodes.at(1).key_share()->public_package());
  }

  ChainView view() { return {controller, registry, host}; }

  Receipt receipt(std::string_view msg, bool good_metadata = true, SimTime now = 0) {
    SignRequest req;
    req.key_id = key_id;
    req.message = sha256(msg);
    req.target_chain = "bitcoin";
    auto signer = good_metadata ? owner : KeyPair::generate(rng);
    auto sig = signer.sign(as_bytes(to_hex(req.message))).encode();
    req.metadata.assign(sig.begin(), sig.end());
    return Receipt::issue("gk", serial++, req, now, 50, gk_key);
  }

  // Runs both rounds with the given signers; returns the aggregate if every
  // signer answered.
  std::optional<Signature> sign(const Receipt& r, const ParticipantList& signers, SimTime now = 1) {
    crypto::CommitmentList<Group> commitments;
    auto session = "s" + std::to_string(r.serial);
    for (auto id : signers) {
      auto reply = nodes.at(id).handle_sign_request(r, session, signers, now, view(), rng);
      if (auto* c = std::get_if<crypto::NonceCommitment<Group>>(&reply))
        commitments.emplace(id, *c);
      else
        return std::nullopt;
    }
    std::map<ParticipantId, crypto::SignatureShare<Group>> shares;
    for (auto id : signers) {
      auto reply = nodes.at(id).handle_round2(session, commitments, now);
      if (auto* s = std::get_if<crypto::SignatureShare<Group>>(&reply))
        shares.emplace(id, *s);
      else
        return std::nullopt;
    }
    auto pkg = crypto::derive_child_package(nodes.at(signers.front()).key_share()->public_package(), key_id);
    return crypto::sign_aggregate<Group>(r.request.message, signers, commitments, shares, pkg);
  }
};

TEST(Init, RegisteredNodeAttests) {
  Net net;
  for (auto& [id, n] : net.nodes) {
    EXPECT_TRUE(net.controller.is_eligible(id, 100));
    EXPECT_TRUE(n.key_share()->consistent());
    EXPECT_EQ(n.key_share()->group_public_key, net.controller.root_package()->group_public_key);
  }
}

TEST(Init, UnknownParticipant) {
  Net net;
  EXPECT_EQ(error_of([&] { Node::init(9, KeyPair::generate(net.rng), {}, net.controller, 0); }), Errc::UnknownParticipant);
}

TEST(Signing, AuthorizedRequestVerifiesUnderChildKey) {
  Net net;
  auto r = net.receipt("pay alice");
  auto sig = net.sign(r, {1, 3, 5});
  ASSERT_TRUE(sig);
  auto child = crypto::derive_child_public(net.controller.root_package()->group_public_key, net.key_id);
  EXPECT_TRUE(crypto::verify(r.request.message, *sig, child));
  EXPECT_FALSE(crypto::verify(r.request.message, *sig, net.controller.root_package()->group_public_key));
  for (auto id : {1u, 3u, 5u}) {
    auto log = net.nodes.at(id).export_log();
    EXPECT_TRUE(verify_entries(log, net.nodes.at(id).enclave_public_key()));
    EXPECT_TRUE(audit_gating(log).empty());
  }
}

TEST(Signing, UnauthorizedEmitsNothing) {
  Net net;
  auto r = net.receipt("steal", false);
  for (auto id : {1u, 2u, 3u}) {
    auto reply = net.nodes.at(id).handle_sign_request(r, "s", {1, 2, 3}, 1, net.view(), net.rng);
    ASSERT_TRUE(std::holds_alternative<Refusal>(reply));
    EXPECT_EQ(std::get<Refusal>(reply).code, Errc::Unauthorized);
    auto r2 = net.nodes.at(id).handle_round2("s", {}, 1);
    EXPECT_FALSE(std::holds_alternative<crypto::SignatureShare<Group>>(r2));
    const auto& last = net.nodes.at(id).log().entries();
    bool saw_false = false;
    for (const auto& e : last)
      if (auto* v = e.as<event::ValidationOutcome>()) saw_false = !v->authorized;
    EXPECT_TRUE(saw_false);
  }
}

TEST(Signing, ReceiptChecks) {
  Net net;
  auto r = net.receipt("x");
  auto& n = net.nodes.at(1);
  auto code = [&](const Receipt& rc, SimTime now) {
    auto reply = n.handle_sign_request(rc, "c", {1, 2, 3}, now, net.view(), net.rng);
    return std::get<Refusal>(reply).code;
  };
  EXPECT_EQ(code(r, 50), Errc::DeadlineExpired);
  auto forged = r;
  forged.request.message[0] ^= 1;
  EXPECT_EQ(code(forged, 1), Errc::Unauthorized);
  auto other = r;
  other.gatekeeper_id = "rogue";
  EXPECT_EQ(code(other, 1), Errc::UnknownGatekeeper);
  net.controller.remove_gatekeeper("gk");
  EXPECT_EQ(code(r, 1), Errc::UnknownGatekeeper);
  // deadline failure is recorded as a protocol error
  bool logged = false;
  for (const auto& e : n.log().entries())
    if (auto* pe = e.as<event::ProtocolError>(); pe && pe->code == Errc::DeadlineExpired) logged = true;
  EXPECT_TRUE(logged);
}

TEST(Signing, ExpiredAttestationRefuses) {
  Net net;
  auto r = net.receipt("late", true, 150);
  auto reply = net.nodes.at(2).handle_sign_request(r, "a", {1, 2, 3}, 150, net.view(), net.rng);
  EXPECT_EQ(std::get<Refusal>(reply).code, Errc::AttestationExpired);
}

TEST(Signing, NodeSideQuota) {
  Net net({}, 2);
  EXPECT_TRUE(net.sign(net.receipt("a"), {1, 2, 3}));
  EXPECT_TRUE(net.sign(net.receipt("b"), {1, 2, 3}));
  auto r = net.receipt("c");
  auto reply = net.nodes.at(1).handle_sign_request(r, "q", {1, 2, 3}, 1, net.view(), net.rng);
  EXPECT_EQ(std::get<Refusal>(reply).code, Errc::QuotaViolation);
  // next window resets
  auto later = net.receipt("d", true, 100);
  for (auto& [id, n] : net.nodes) net.controller.record_attestation(*n.attest(net.controller.params().code_hash, 100), 100);
  EXPECT_TRUE(net.sign(later, {1, 2, 3}, 101));
}

TEST(Behavior, StallAndRefuse) {
  Net net({{4, BehaviorMode::parse("stall")}, {5, BehaviorMode::parse("refuse-signing")}});
  auto r = net.receipt("m");
  auto stall = net.nodes.at(4).handle_sign_request(r, "b", {3, 4, 5}, 1, net.view(), net.rng);
  EXPECT_TRUE(std::holds_alternative<std::monostate>(stall));
  EXPECT_FALSE(net.nodes.at(4).ping());
  EXPECT_TRUE(net.nodes.at(5).ping());
  auto refuse = net.nodes.at(5).handle_sign_request(r, "b", {3, 4, 5}, 1, net.view(), net.rng);
  EXPECT_EQ(std::get<Refusal>(refuse).code, Errc::Declined);
  net.nodes.at(3).handle_abort("b", {4, 5}, 2);
  std::set<ParticipantId> reported;
  for (const auto& e : net.nodes.at(3).log().entries())
    if (auto* u = e.as<event::NodeUnavailable>()) reported.insert(u->peer);
  EXPECT_EQ(reported, (std::set<ParticipantId>{4, 5}));
}

TEST(Behavior, CorruptShareIsCaughtAtAggregation) {
  Net net({{2, BehaviorMode::parse("corrupt-share")}});
  try {
    net.sign(net.receipt("m"), {1, 2, 3});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::InvalidSignatureShare);
    EXPECT_EQ(e.party(), 2u);
  }
}

TEST(Behavior, StaleAttestationSkipsEmission) {
  Net net({{3, BehaviorMode::parse("stale-attestation")}});
  EXPECT_FALSE(net.nodes.at(3).attest(net.controller.params().code_hash, 50));
  EXPECT_TRUE(net.nodes.at(1).attest(net.controller.params().code_hash, 50));
  EXPECT_EQ(error_of([] { BehaviorMode::parse("sleepy"); }), Errc::ConfigError);
}

TEST(Dkg, CorruptDealerTriggersComplaint) {
  Net net;
  ParticipantList ids{1, 2, 3, 4, 5};
  net.nodes.at(2).set_behavior(BehaviorMode::parse("corrupt-share"));
  std::map<ParticipantId, crypto::DkgRound1<Group>> r1;
  for (auto& [id, n] : net.nodes) r1.emplace(id, *n.dkg_round1("dkg2", 3, ids, 5, net.rng));
  std::vector<crypto::Complaint> complaints;
  for (auto& [id, n] : net.nodes) {
    std::map<ParticipantId, crypto::DealerMessage<Group>> inbox;
    for (auto& [d, m] : r1) inbox.emplace(d, crypto::DealerMessage<Group>{m.broadcast, m.directed_shares.at(id)});
    auto res = n.dkg_round2("dkg2", r1.at(id).state, inbox, 5);
    if (auto* c = std::get_if<std::vector<crypto::Complaint>>(&res)) complaints.insert(complaints.end(), c->begin(), c->end());
  }
  ASSERT_EQ(complaints.size(), 1u);
  EXPECT_EQ(complaints[0].dealer, 2u);
  std::map<ParticipantId, crypto::VssCommitment<Group>> commitments;
  for (auto& [d, m] : r1) commitments.emplace(d, m.broadcast);
  try {
    crypto::adjudicate_complaints<Group>(complaints, commitments, [&](const crypto::Complaint& c) {
      return std::optional<SecretScalar>(r1.at(c.dealer).directed_shares.at(c.complainer));
    });
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::SessionAborted);
    EXPECT_EQ(e.party(), 2u);
  }
}

TEST(Reshare, StalledDealerIsTolerated) {
  Net net({{5, BehaviorMode::parse("stall")}});
  ParticipantList new_ids{1, 2, 3, 4};
  std::map<ParticipantId, crypto::VssDealing<Group>> dealings;
  ParticipantList responders;
  for (auto& [id, n] : net.nodes)
    if (n.ping()) responders.push_back(id);
  ASSERT_EQ(responders, (ParticipantList{1, 2, 3, 4}));
  for (auto id : responders) {
    auto d = net.nodes.at(id).reshare_deal("rs", responders, 3, new_ids, 10, net.rng);
    ASSERT_TRUE(d);
    dealings.emplace(id, *d);
  }
  EXPECT_FALSE(net.nodes.at(5).reshare_deal("rs", responders, 3, new_ids, 10, net.rng));
  auto old_pub = *net.controller.root_package();
  for (auto id : new_ids) {
    std::map<ParticipantId, crypto::DealerMessage<Group>> inbox;
    for (auto& [d, m] : dealings) inbox.emplace(d, crypto::DealerMessage<Group>{m.commitment, m.shares.at(id)});
    auto res = net.nodes.at(id).reshare_receive("rs", 3, new_ids, old_pub, responders, inbox, 10);
    auto& ks = std::get<KeyShare>(res);
    EXPECT_EQ(ks.group_public_key, old_pub.group_public_key);
    net.nodes.at(id).install_share(ks, 1, "rs", kReshareComplete, 10);
  }
  net.nodes.at(5).retire(1, "rs", 10);
  EXPECT_FALSE(net.nodes.at(5).key_share());
  for (auto& [id, n] : net.nodes) net.controller.record_attestation(*n.attest(net.controller.params().code_hash, 10), 10);
  auto sig = net.sign(net.receipt("after reshare", true, 10), {2, 3, 4}, 11);
  ASSERT_TRUE(sig);
}

TEST(Log, JsonlRoundTripAndTamper) {
  Net net;
  net.sign(net.receipt("log me"), {1, 2, 3});
  const auto& n = net.nodes.at(1);
  auto text = export_jsonl(n.export_log());
  auto parsed = parse_jsonl(text);
  EXPECT_EQ(parsed, n.export_log());
  EXPECT_GE(parsed.size(), 3u);
  EXPECT_TRUE(verify_entries(parsed, n.enclave_public_key()));
  EXPECT_FALSE(verify_entries(parsed, net.nodes.at(2).enclave_public_key()));

  // flip one hex digit inside the signed event: parse succeeds, verify fails
  auto pos = text.find("\"status\":\"share-emitted\"");
  ASSERT_NE(pos, std::string::npos);
  auto tampered = text;
  tampered.replace(pos, 24, "\"status\":\"share-emitteD\"");
  auto bad = parse_jsonl(tampered);
  EXPECT_FALSE(verify_entries(bad, n.enclave_public_key()));

  // reordering keys or whitespace is rejected outright
  auto first_line = text.substr(0, text.find('\n'));
  EXPECT_EQ(error_of([&] { parse_jsonl(" " + first_line); }), Errc::InvalidEncoding);

  // dropping an entry breaks the sequence
  auto gap = parsed;
  gap.erase(gap.begin() + 1);
  EXPECT_FALSE(verify_entries(gap, n.enclave_public_key()));
}

TEST(Log, EverySingleByteTamperDetected) {
  Net net;
  net.sign(net.receipt("bytes"), {1, 2, 3});
  const auto& n = net.nodes.at(2);
  auto entries = n.export_log();
  auto line = entries.back().to_json().dump();
  // property: any single-character change is rejected by parse or verify
  for (std::size_t i = 0; i < line.size(); ++i) {
    auto t = line;
    t[i] = t[i] == 'a' ? 'b' : (t[i] == '0' ? '1' : 'a');
    try {
      auto parsed = parse_jsonl(t);
      ASSERT_EQ(parsed.size(), 1u);
      EXPECT_FALSE(parsed[0].verify(n.enclave_public_key()) && parsed[0] == entries.back()) << i;
      EXPECT_FALSE(parsed[0].verify(n.enclave_public_key())) << "undetected tamper at " << i;
    } catch (const Error&) {
    } catch (const std::exception&) {
    }
  }
}

TEST(Log, EmptyNodeExportsNothing) {
  Node n(1, KeyPair::generate(*std::make_unique<Drbg>(1)));
  EXPECT_TRUE(n.export_log().empty());
  EXPECT_EQ(export_jsonl(n.export_log()), "");
}

TEST(Snapshot, NodeRoundTrip) {
  Net net;
  net.sign(net.receipt("snap"), {1, 2, 3});
  auto j = net.nodes.at(1).to_json();
  auto back = Node::from_json(j);
  EXPECT_EQ(back.to_json(), j);
}

}  // namespace
