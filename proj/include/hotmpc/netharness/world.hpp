#pragma once

#include <json.hpp>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "hotmpc/econ/dao.hpp"
#include "hotmpc/econ/disputes.hpp"
#include "hotmpc/gatekeeper/gatekeeper.hpp"
#include "hotmpc/netharness/network.hpp"
#include "hotmpc/netharness/transcript.hpp"

// The simulated deployment: chains, nodes, gatekeepers, the token ledger and
// the network between them, driven by one virtual clock and one seeded
// random stream.

namespace hotmpc::netharness {

struct GatekeeperSpec {
  std::string id = "gk-1";
  std::uint32_t capacity = 10;
  SimTime window = 100;
  SimTime receipt_ttl = 50;
  std::string behavior = "honest";
  econ::Amount stake = 300;
};

inline void to_json(nlohmann::json& j, const GatekeeperSpec& g) {
  j = {{"id", g.id},
       {"capacity", g.capacity},
       {"window", g.window},
       {"receipt_ttl", g.receipt_ttl},
       {"behavior", g.behavior},
       {"stake", g.stake}};
}

inline void from_json(const nlohmann::json& j, GatekeeperSpec& g) {
  g = GatekeeperSpec{};
  for (const auto& [k, _] : j.items())
    if (k != "id" && k != "capacity" && k != "window" && k != "receipt_ttl" && k != "behavior" && k != "stake")
      throw Error(Errc::ConfigError, "unknown gatekeeper setting " + k);
  g.id = j.value("id", g.id);
  g.capacity = j.value("capacity", g.capacity);
  g.window = j.value("window", g.window);
  g.receipt_ttl = j.value("receipt_ttl", g.receipt_ttl);
  g.behavior = j.value("behavior", g.behavior);
  g.stake = j.value("stake", g.stake);
  gatekeeper::parse_gatekeeper_behavior(g.behavior);
  if (g.id.empty()) throw Error(Errc::ConfigError, "gatekeeper id is empty");
}

struct WorldConfig {
  std::uint64_t seed = 1;
  unsigned nodes = 5;
  unsigned threshold = 3;
  NetConfig network;
  std::map<ParticipantId, std::string> behaviors;
  std::vector<GatekeeperSpec> gatekeepers{GatekeeperSpec{}};
  nlohmann::json econ = nlohmann::json::object();
  SimTime attestation_ttl = 100;
  SimTime reattest_interval = 50;
  std::vector<std::string> dao_members{"dao-1", "dao-2", "dao-3"};
  std::vector<std::string> users{"alice", "bob", "fish"};
  econ::Amount initial_balance = 1000;
  econ::Amount node_stake = 200;
  econ::Amount dao_stake = 100;

  void validate() const {
    if (nodes == 0 || nodes > 64) throw Error(Errc::ConfigError, "node count must be in [1, 64]");
    if (threshold == 0 || threshold > nodes) throw Error(Errc::ConfigError, "threshold out of range");
    for (const auto& [id, b] : behaviors) {
      if (id == 0 || id > nodes) throw Error(Errc::ConfigError, "behavior for unknown node " + std::to_string(id));
      node::BehaviorMode::parse(b);
    }
    if (gatekeepers.empty()) throw Error(Errc::ConfigError, "at least one gatekeeper is required");
    std::set<std::string> ids;
    for (const auto& g : gatekeepers)
      if (!ids.insert(g.id).second) throw Error(Errc::ConfigError, "duplicate gatekeeper " + g.id);
    if (reattest_interval == 0 || reattest_interval >= attestation_ttl)
      throw Error(Errc::ConfigError, "re-attestation interval must be positive and below the attestation ttl");
    econ::EconParams p;
    econ::apply_patch(p, econ);
    network.validate();
  }
};

inline void to_json(nlohmann::json& j, const WorldConfig& c) {
  nlohmann::json behaviors = nlohmann::json::object();
  for (const auto& [id, b] : c.behaviors) behaviors[std::to_string(id)] = b;
  j = {{"seed", c.seed},
       {"nodes", c.nodes},
       {"threshold", c.threshold},
       {"network", c.network},
       {"behaviors", behaviors},
       {"gatekeepers", c.gatekeepers},
       {"econ", c.econ},
       {"attestation_ttl", c.attestation_ttl},
       {"reattest_interval", c.reattest_interval},
       {"dao_members", c.dao_members},
       {"users", c.users},
       {"initial_balance", c.initial_balance},
       {"node_stake", c.node_stake},
       {"dao_stake", c.dao_stake}};
}

inline void from_json(const nlohmann::json& j, WorldConfig& c) {
  static const std::set<std::string> known{"seed",          "nodes",           "threshold",         "network",
                                           "behaviors",     "gatekeepers",     "econ",              "attestation_ttl",
                                           "reattest_interval", "dao_members", "users",             "initial_balance",
                                           "node_stake",    "dao_stake"};
  for (const auto& [k, _] : j.items())
    if (!known.contains(k)) throw Error(Errc::ConfigError, "unknown world setting " + k);
  c = WorldConfig{};
  c.seed = j.value("seed", c.seed);
  c.nodes = j.value("nodes", c.nodes);
  c.threshold = j.value("threshold", c.threshold);
  if (j.contains("network")) c.network = j.at("network").get<NetConfig>();
  if (j.contains("behaviors"))
    for (const auto& [k, v] : j.at("behaviors").items()) {
      ParticipantId id = 0;
      try {
        id = static_cast<ParticipantId>(std::stoul(k));
      } catch (const std::exception&) {
        throw Error(Errc::ConfigError, "behavior key must be a node id: " + k);
      }
      c.behaviors[id] = v.get<std::string>();
    }
  if (j.contains("gatekeepers")) c.gatekeepers = j.at("gatekeepers").get<std::vector<GatekeeperSpec>>();
  c.econ = j.value("econ", nlohmann::json::object());
  c.attestation_ttl = j.value("attestation_ttl", c.attestation_ttl);
  c.reattest_interval = j.value("reattest_interval", c.reattest_interval);
  c.dao_members = j.value("dao_members", c.dao_members);
  c.users = j.value("users", c.users);
  c.initial_balance = j.value("initial_balance", c.initial_balance);
  c.node_stake = j.value("node_stake", c.node_stake);
  c.dao_stake = j.value("dao_stake", c.dao_stake);
  c.validate();
}

struct SignOutcome {
  std::string gatekeeper;
  KeyId key_id;
  Digest32 message{};
  std::optional<Errc> error;
  std::string detail;
  std::optional<Signature> signature;
  PublicKey child_public_key;
  bool verified = false;
  ParticipantList signers;
  unsigned attempts = 0;
  ParticipantList blacklisted;
  std::vector<std::string> failed_over;

  int exit_code() const { return error ? hotmpc::exit_code(*error) : 0; }

  nlohmann::json to_json() const {
    nlohmann::json j{{"gatekeeper", gatekeeper},
                     {"key_id", key_id},
                     {"message", to_hex(message)},
                     {"ok", !error},
                     {"exit_code", exit_code()}};
    if (error) {
      j["error"] = to_string(*error);
      j["detail"] = detail;
    }
    if (signature) {
      j["signature"] = *signature;
      j["child_public_key"] = child_public_key;
      j["verified"] = verified;
      j["signers"] = signers;
      j["attempts"] = attempts;
    }
    if (!blacklisted.empty()) j["blacklisted"] = blacklisted;
    if (!failed_over.empty()) j["failed_over"] = failed_over;
    return j;
  }
};

struct EpochRecord {
  std::uint64_t epoch = 0;
  econ::Amount supply_before = 0;
  econ::Amount supply_after = 0;
  econ::Amount minted = 0;
  econ::Amount inflation = 0;
  std::map<std::string, econ::Amount> rewards;
};

class World : public gatekeeper::SignerTransport {
 public:
  explicit World(WorldConfig cfg) : cfg_(std::move(cfg)) {
    cfg_.validate();
    rng_ = Drbg(cfg_.seed);
    net_ = SimNetwork(cfg_.network, rng_.fork("network"));
    genesis();
  }

  // SignerTransport
  SimTime now() const override { return clock_; }
  const chainstate::Controller& controller() const override { return ctrl_; }

  std::map<ParticipantId, gatekeeper::Reply<node::Round1Reply>> round1(const gatekeeper::Receipt& receipt,
                                                                      const std::string& session,
                                                                      const ParticipantList& signers) override {
    return exchange<node::Round1Reply>(session, 1, signers, [&](node::Node& n, SimTime at) {
      observe_at_ = at;
      return n.handle_sign_request(receipt, session, signers, at, view(), rng_);
    });
  }

  std::map<ParticipantId, gatekeeper::Reply<node::Round2Reply>> round2(
      const std::string& session, const ParticipantList& signers,
      const crypto::CommitmentList<Group>& commitments) override {
    return exchange<node::Round2Reply>(
        session, 2, signers, [&](node::Node& n, SimTime at) { return n.handle_round2(session, commitments, at); });
  }

  void abort(const std::string& session, const ParticipantList& recipients,
             const ParticipantList& unavailable) override {
    SimTime start = clock_, done = clock_;
    for (auto id : recipients) {
      auto lat = net_.hop(id);
      if (!lat) continue;
      nodes_.at(id).handle_abort(session, unavailable, start + *lat);
      tx_.record(start + *lat, "abort", {{"session", session}, {"to", id}, {"sent", start}, {"unavailable", unavailable}});
      done = std::max(done, start + *lat);
    }
    clock_ = done;
  }

  bool probe(const ParticipantList& ids) override {
    SimTime cost = 0;
    bool ok = true;
    for (auto id : ids) {
      auto there = net_.hop(id);
      auto back = there && nodes_.at(id).ping() ? net_.hop(id) : std::nullopt;
      if (!there || !back || *there + *back > cfg_.network.timeout) {
        ok = false;
        cost = cfg_.network.timeout;
      } else {
        cost = std::max(cost, *there + *back);
      }
    }
    clock_ += cost;
    tx_.record(clock_, "probe", {{"nodes", ids}, {"ok", ok}});
    return ok;
  }

  // Scenario operations.

  std::string deploy(const std::string& chain, const std::string& policy) {
    tick();
    auto addr = host_.deploy_policy(chain, policy);
    tx_.record(clock_, "deploy", {{"chain", chain}, {"policy", policy}, {"contract", addr}});
    return addr;
  }

  // Returns the key id and its derived public key.
  std::pair<KeyId, PublicKey> reserve_key(const std::string& chain, const std::string& contract) {
    tick();
    if (!host_.deployed(chain, contract)) throw Error(Errc::UnknownContract, chain + "/" + contract);
    auto id = registry_.reserve_key(chain, contract);
    auto pk = crypto::derive_child_public(ctrl_.root_package()->group_public_key, id);
    tx_.record(clock_, "reserve-key", {{"chain", chain}, {"contract", contract}, {"key_id", id}, {"public_key", pk}});
    return {id, pk};
  }

  const KeyPair& passkey(const std::string& owner) {
    auto it = passkeys_.find(owner);
    if (it == passkeys_.end()) it = passkeys_.emplace(owner, KeyPair::generate(rng_)).first;
    return it->second;
  }
  const std::map<std::string, KeyPair>& passkeys() const { return passkeys_; }

  void register_owners(const KeyId& key_id, const std::vector<std::string>& owners) {
    tick();
    const auto& entry = registry_.lookup_authorizer(key_id);
    std::vector<PublicKey> keys;
    for (const auto& o : owners) keys.push_back(passkey(o).public_key);
    host_.register_key(entry.chain_id, entry.contract_address, key_id, keys);
    tx_.record(clock_, "register-key", {{"key_id", key_id}, {"owners", owners}});
  }

  // Metadata forms: "passkey:<owner>", "multi:<a>,<b>", "hex:<bytes>",
  // "forged" (signature by an unregistered key), or empty.
  Bytes metadata_for(const std::string& form, const Digest32& message) {
    auto hex = to_hex(message);
    auto sign_with = [&](const KeyPair& k) {
      auto s = k.sign(as_bytes(hex)).encode();
      return Bytes(s.begin(), s.end());
    };
    if (form.empty()) return {};
    if (form.rfind("passkey:", 0) == 0) return sign_with(passkey(form.substr(8)));
    if (form.rfind("multi:", 0) == 0) {
      Bytes out;
      std::string rest = form.substr(6);
      std::size_t pos = 0;
      while (pos <= rest.size()) {
        auto comma = rest.find(',', pos);
        auto name = rest.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
        auto part = sign_with(passkey(name));
        out.insert(out.end(), part.begin(), part.end());
        if (comma == std::string::npos) break;
        pos = comma + 1;
      }
      return out;
    }
    if (form.rfind("hex:", 0) == 0) {
      auto b = from_hex(form.substr(4));
      if (!b) throw Error(Errc::MalformedRequest, "metadata is not hex");
      return *b;
    }
    if (form == "forged") return sign_with(KeyPair::generate(rng_));
    throw Error(Errc::ConfigError, "unknown metadata form " + form);
  }

  // Full signing flow through `gatekeeper_id`; an offline gatekeeper makes
  // the user switch to the next one.
  SignOutcome sign(const std::string& gatekeeper_id, const KeyId& key_id, const std::string& message,
                   const std::string& metadata, const std::string& target_chain = "bitcoin",
                   const std::string& scheme = std::string(kSchemeSchnorr)) {
    tick();
    if (!gatekeepers_.contains(gatekeeper_id)) throw Error(Errc::UnknownTarget, gatekeeper_id);
    SignOutcome out;
    out.key_id = key_id;
    out.message = sha256(message);
    gatekeeper::SignRequest req{key_id, out.message, metadata_for(metadata, out.message), target_chain, scheme};
    std::vector<std::string> order{gatekeeper_id};
    for (const auto& [id, _] : gatekeepers_)
      if (id != gatekeeper_id) order.push_back(id);

    for (const auto& gid : order) {
      out.gatekeeper = gid;
      tx_.record(clock_, "request",
                 {{"gatekeeper", gid}, {"key_id", key_id}, {"message", to_hex(out.message)}, {"scheme", scheme}}, 1);
      try {
        auto res = gatekeepers_.at(gid).submit(req, *this);
        out.error.reset();
        out.signature = res.signature;
        out.signers = res.signers;
        out.attempts = res.attempts;
        out.blacklisted = res.blacklisted;
        out.child_public_key = crypto::derive_child_public(ctrl_.root_package()->group_public_key, key_id);
        out.verified = crypto::verify(out.message, res.signature, out.child_public_key);
        tx_.record(clock_, "signature",
                   {{"gatekeeper", gid},
                    {"signers", res.signers},
                    {"attempts", res.attempts},
                    {"signature", res.signature},
                    {"verified", out.verified}},
                   6);
        break;
      } catch (const Error& e) {
        out.error = e.code();
        out.detail = e.what();
        tx_.record(clock_, "rejected", {{"gatekeeper", gid}, {"error", to_string(e.code())}, {"detail", e.what()}});
        if (e.code() != Errc::Timeout) break;
        out.failed_over.push_back(gid);
        tx_.record(clock_, "failover", {{"from", gid}});
      }
    }
    if (out.signature) ++signatures_;
    outcomes_.push_back(out);
    return out;
  }

  // A request that bypasses the gatekeeper network: the receipt is signed by
  // an unregistered key. Returns the node's refusal code.
  Errc direct_request(ParticipantId target, const KeyId& key_id, const std::string& message) {
    tick();
    auto& n = node_at(target);
    auto rogue = KeyPair::generate(rng_);
    gatekeeper::SignRequest req{key_id, sha256(message), {}, "bitcoin", std::string(kSchemeSchnorr)};
    auto receipt = gatekeeper::Receipt::issue("rogue", 0, req, clock_, 50, rogue);
    auto session = "direct/" + std::to_string(direct_attempts_++);
    observe_at_ = clock_;
    auto reply = n.handle_sign_request(receipt, session, {target}, clock_, view(), rng_);
    Errc code = Errc::Timeout;
    if (auto* r = std::get_if<node::Refusal>(&reply)) code = r->code;
    if (std::holds_alternative<crypto::NonceCommitment<Group>>(reply)) {
      direct_accepted_ = true;
      code = Errc::MalformedRequest;
    }
    tx_.record(clock_, "direct-request", {{"node", target}, {"result", to_string(code)}, {"accepted", direct_accepted_}});
    return code;
  }

  void advance(SimTime dt) {
    SimTime target = clock_ + dt;
    while (next_reattest_ <= target) {
      clock_ = std::max(clock_, next_reattest_);
      reattest();
    }
    clock_ = target;
    tx_.record(clock_, "advance", {{"dt", dt}});
  }

  // Faults: node targets "node-<id>" accept offline, partition and
  // behavior:<mode>; gatekeeper targets accept offline and ignore-quota.
  void inject_fault(const std::string& target, const std::string& fault) {
    tick();
    if (auto id = econ::node_of_account(target)) {
      auto& n = node_at(*id);
      if (fault == "offline")
        net_.set_offline(*id, true);
      else if (fault == "partition")
        net_.set_isolated(*id, true);
      else if (fault.rfind("behavior:", 0) == 0)
        n.set_behavior(node::BehaviorMode::parse(fault.substr(9)));
      else
        throw Error(Errc::ConfigError, "unknown node fault " + fault);
    } else if (gatekeepers_.contains(target)) {
      if (fault != "offline" && fault != "ignore-quota") throw Error(Errc::ConfigError, "unknown gatekeeper fault " + fault);
      gatekeepers_.at(target).set_behavior(gatekeeper::parse_gatekeeper_behavior(fault));
    } else {
      throw Error(Errc::UnknownTarget, target);
    }
    tx_.record(clock_, "fault", {{"target", target}, {"fault", fault}});
  }

  void heal(const std::string& target) {
    tick();
    if (target == "all") {
      net_.heal_all();
      for (auto& [_, g] : gatekeepers_) g.set_behavior(gatekeeper::GatekeeperBehavior::Honest);
    } else if (auto id = econ::node_of_account(target)) {
      node_at(*id);
      net_.heal(*id);
    } else if (gatekeepers_.contains(target)) {
      gatekeepers_.at(target).set_behavior(gatekeeper::GatekeeperBehavior::Honest);
    } else {
      throw Error(Errc::UnknownTarget, target);
    }
    tx_.record(clock_, "heal", {{"target", target}});
  }

  gatekeeper::GroupTestResult health_check(const std::string& gatekeeper_id) {
    tick();
    auto it = gatekeepers_.find(gatekeeper_id);
    if (it == gatekeepers_.end()) throw Error(Errc::UnknownTarget, gatekeeper_id);
    auto res = it->second.health_check(ctrl_.eligible_participants(clock_), *this);
    tx_.record(clock_, "health-check",
               {{"gatekeeper", gatekeeper_id}, {"defectives", res.defectives}, {"rounds", res.rounds}, {"tests", res.tests}});
    return res;
  }

  // Evidence forms: "receipts" (the accused gatekeeper's public receipt
  // log), "log" (the accused node's log), "tampered-log" (that log with one
  // event altered after signing), "peer-logs" (every other node's log), or an
  // explicit JSON object.
  nlohmann::json gather_evidence(const std::string& accused, const nlohmann::json& form) {
    if (form.is_object()) return form;
    auto kind = form.get<std::string>();
    if (kind == "receipts") {
      auto it = gatekeepers_.find(accused);
      if (it == gatekeepers_.end()) throw Error(Errc::UnknownAccused, accused);
      nlohmann::json arr = nlohmann::json::array();
      for (const auto& r : it->second.receipt_log()) arr.push_back(r);
      return {{"receipts", arr}};
    }
    auto id = econ::node_of_account(accused);
    if (kind == "log" || kind == "tampered-log") {
      if (!id || !nodes_.contains(*id)) throw Error(Errc::UnknownAccused, accused);
      auto entries = nodes_.at(*id).export_log();
      if (kind == "tampered-log") tamper(entries);
      return {{"log", node::export_jsonl(entries)}};
    }
    if (kind == "peer-logs") {
      nlohmann::json logs = nlohmann::json::array();
      for (const auto& [pid, n] : nodes_)
        if (!id || pid != *id) logs.push_back(node::export_jsonl(n.export_log()));
      return {{"logs", logs}};
    }
    throw Error(Errc::ConfigError, "unknown evidence form " + kind);
  }

  // Opens and resolves a dispute. An upheld quota violation also removes the
  // gatekeeper from the controller registry.
  nlohmann::json dispute(const std::string& fisherman, const std::string& accused, econ::Predicate predicate,
                         const nlohmann::json& evidence_form, std::optional<econ::Amount> fee = std::nullopt) {
    tick();
    auto evidence = gather_evidence(accused, evidence_form);
    auto id = disputes_.open_dispute(ledger_, fisherman, accused, predicate, evidence,
                                     fee.value_or(ledger_.params().dispute_fee));
    auto ctx = econ::EvidenceContext::from_controller(ctrl_, ledger_.params().unavailability_streak);
    const auto& res = disputes_.resolve_dispute(ledger_, id, ctx);
    auto out = econ::to_json(res);
    out["id"] = id;
    out["accused"] = accused;
    out["predicate"] = econ::to_string(predicate);
    if (res.verdict == econ::VerdictKind::Upheld && predicate == econ::Predicate::ReceiptBeyondQuota) {
      ctrl_.remove_gatekeeper(accused);
      out["gatekeeper_removed"] = true;
    }
    tx_.record(clock_, "dispute", out);
    return out;
  }

  // Closes the ledger epoch and mints rewards weighted by successful rounds
  // (shares emitted plus completed DKG and resharing) found in node logs.
  EpochRecord close_epoch() {
    tick();
    std::map<std::string, std::uint64_t> participation;
    for (const auto& [id, n] : nodes_) {
      auto& cursor = counted_seq_[id];
      std::uint64_t count = 0;
      for (const auto& e : n.export_log(cursor))
        if (auto* r = e.as<node::event::RoundStatus>();
            r && (r->status == node::kShareEmitted || r->status == node::kDkgComplete ||
                  r->status == node::kReshareComplete))
          ++count;
      cursor = n.log().size();
      participation[node_account(id)] = count;
    }
    EpochRecord rec;
    rec.inflation = ledger_.params().inflation_per_epoch;
    rec.supply_before = ledger_.total_supply();
    ledger_.close_epoch();
    auto mint = ledger_.epoch_mint(participation);
    rec.epoch = mint.epoch;
    rec.minted = mint.minted;
    rec.rewards = mint.rewards;
    rec.supply_after = ledger_.total_supply();
    epochs_.push_back(rec);
    tx_.record(clock_, "epoch",
               {{"epoch", rec.epoch},
                {"minted", rec.minted},
                {"rewards", rec.rewards},
                {"participation", participation},
                {"treasury", mint.to_treasury},
                {"lease_paid", mint.lease_paid}});
    return rec;
  }

  // Configuration change: propose, vote, reshare among responsive old
  // holders, install new shares and retire excluded nodes.
  nlohmann::json reshare(ParticipantList new_ids, unsigned new_threshold) {
    tick();
    std::sort(new_ids.begin(), new_ids.end());
    auto cur = ctrl_.fetch_config();
    std::vector<chainstate::ParticipantRecord> records;
    std::map<ParticipantId, KeyPair> joiners;
    for (auto id : new_ids) {
      if (const auto* rec = cur.find(id)) {
        records.push_back(*rec);
      } else if (nodes_.contains(id)) {
        throw Error(Errc::InvalidConfig, "node " + std::to_string(id) + " was retired and cannot rejoin");
      } else {
        auto enclave = KeyPair::generate(rng_);
        records.push_back({id, "sim://" + node_account(id), "", enclave.public_key, 0});
        joiners.emplace(id, std::move(enclave));
      }
    }
    ParticipantList voters;
    for (auto id : cur.participant_ids())
      if (responsive(id) && ctrl_.is_eligible(id, clock_)) voters.push_back(id);
    if (voters.empty()) throw Error(Errc::ThresholdUnavailable, "no responsive participant to propose");
    auto pid = ctrl_.propose_config(voters.front(), records, new_threshold);
    tx_.record(clock_, "propose-config", {{"proposal", pid}, {"participants", new_ids}, {"threshold", new_threshold}});
    for (auto& [id, enclave] : joiners) {
      nodes_.emplace(id, node::Node::init(id, std::move(enclave), {}, ctrl_, clock_));
      ledger_.allocate(node_account(id), cfg_.initial_balance);
      ledger_.stake(node_account(id), econ::Role::MpcNode, cfg_.node_stake);
    }
    for (auto id : voters) ctrl_.vote(id, pid);
    auto trigger = ctrl_.finalize();
    if (!trigger) throw Error(Errc::ThresholdUnavailable, "proposal lacks a majority of votes");
    tx_.record(clock_, "reshare-trigger", {{"proposal", pid}, {"votes", voters}});
    for (auto id : new_ids)
      if (!net_.reachable(id)) throw Error(Errc::ThresholdUnavailable, "new participant " + std::to_string(id) + " unreachable");

    auto old_public = *ctrl_.root_package();
    ParticipantList dealers;
    for (auto id : trigger->old_participants)
      if (responsive(id) && nodes_.at(id).key_share()) dealers.push_back(id);
    auto session = "reshare/" + std::to_string(pid);
    std::map<ParticipantId, KeyShare> fresh;
    for (unsigned attempt = 0; fresh.empty(); ++attempt) {
      if (dealers.size() < trigger->old_threshold)
        throw Error(Errc::ThresholdUnavailable, std::to_string(dealers.size()) + " responsive dealers for threshold " +
                                                    std::to_string(trigger->old_threshold));
      std::map<ParticipantId, crypto::VssDealing<Group>> dealings;
      for (auto id : dealers)
        if (auto d = nodes_.at(id).reshare_deal(session, dealers, new_threshold, new_ids, clock_, rng_))
          dealings.emplace(id, std::move(*d));
      clock_ += 2 * cfg_.network.latency_max;
      tx_.record(clock_, "reshare-deal", {{"session", session}, {"attempt", attempt}, {"dealers", dealers}});
      ParticipantList drop;
      for (auto id : dealers)
        if (!dealings.contains(id)) drop.push_back(id);
      std::map<ParticipantId, KeyShare> got;
      if (drop.empty()) {
        for (auto id : new_ids) {
          std::map<ParticipantId, crypto::DealerMessage<Group>> inbox;
          for (const auto& [d, m] : dealings) inbox.emplace(d, crypto::DealerMessage<Group>{m.commitment, m.shares.at(id)});
          auto res = nodes_.at(id).reshare_receive(session, new_threshold, new_ids, old_public, dealers, inbox, clock_);
          if (auto* ks = std::get_if<KeyShare>(&res))
            got.emplace(id, std::move(*ks));
          else
            for (const auto& c : std::get<std::vector<crypto::Complaint>>(res)) drop.push_back(c.dealer);
        }
        clock_ += 2 * cfg_.network.latency_max;
      }
      if (drop.empty()) {
        fresh = std::move(got);
        break;
      }
      std::sort(drop.begin(), drop.end());
      drop.erase(std::unique(drop.begin(), drop.end()), drop.end());
      tx_.record(clock_, "reshare-exclude", {{"session", session}, {"dealers", drop}});
      std::erase_if(dealers, [&](ParticipantId id) { return std::binary_search(drop.begin(), drop.end(), id); });
    }
    auto next_epoch = cur.epoch + 1;
    for (auto& [id, ks] : fresh) nodes_.at(id).install_share(std::move(ks), next_epoch, session, node::kReshareComplete, clock_);
    ParticipantList retired;
    for (auto id : trigger->old_participants)
      if (!std::binary_search(new_ids.begin(), new_ids.end(), id)) {
        if (net_.reachable(id)) nodes_.at(id).retire(next_epoch, session, clock_);
        retired.push_back(id);
      }
    ctrl_.complete_reshare(pid, nodes_.at(new_ids.front()).key_share()->public_package());
    nlohmann::json out{{"epoch", ctrl_.epoch()},
                       {"participants", new_ids},
                       {"threshold", new_threshold},
                       {"dealers", dealers},
                       {"retired", retired},
                       {"group_public_key", ctrl_.root_package()->group_public_key}};
    tx_.record(clock_, "reshare-complete", out);
    return out;
  }

  // Copies of the current key shares, kept for later comparison.
  void snapshot_shares(const std::string& label) {
    auto& snap = share_snapshots_[label];
    snap.clear();
    for (const auto& [id, n] : nodes_)
      if (n.key_share()) snap.emplace(id, *n.key_share());
  }
  const std::map<ParticipantId, KeyShare>& share_snapshot(const std::string& label) const {
    auto it = share_snapshots_.find(label);
    if (it == share_snapshots_.end()) throw Error(Errc::ConfigError, "no share snapshot " + label);
    return it->second;
  }

  // Appends a digest of every node log so the transcript hash also covers
  // the logs.
  void seal() {
    for (const auto& [id, n] : nodes_)
      tx_.record(clock_, "log-digest", {{"node", id}, {"entries", n.log().size()},
                                        {"sha256", to_hex(sha256(node::export_jsonl(n.log().entries())))}});
    tx_.record(clock_, "ledger", {{"supply", ledger_.total_supply()}, {"treasury", ledger_.treasury()},
                                  {"burned", ledger_.burned()}, {"conserved", ledger_.conserved()}});
  }

  // Accessors.
  const WorldConfig& config() const { return cfg_; }
  const chainstate::KeyRegistry& registry() const { return registry_; }
  chainstate::KeyRegistry& registry() { return registry_; }
  const chainsim::ChainHost& host() const { return host_; }
  chainsim::ChainHost& host() { return host_; }
  chainstate::Controller& mutable_controller() { return ctrl_; }
  const econ::Ledger& ledger() const { return ledger_; }
  econ::Ledger& ledger() { return ledger_; }
  const econ::DisputeBook& disputes() const { return disputes_; }
  econ::Dao& dao() { return dao_; }
  const std::map<ParticipantId, node::Node>& nodes() const { return nodes_; }
  const std::map<std::string, gatekeeper::Gatekeeper>& gatekeepers() const { return gatekeepers_; }
  const SimNetwork& network() const { return net_; }
  const Transcript& transcript() const { return tx_; }
  const std::vector<SignOutcome>& outcomes() const { return outcomes_; }
  const std::vector<EpochRecord>& epochs() const { return epochs_; }
  std::size_t signatures() const { return signatures_; }
  bool direct_accepted() const { return direct_accepted_; }
  unsigned direct_attempts() const { return direct_attempts_; }
  const PublicKey& genesis_public_key() const { return genesis_pk_; }
  Drbg& rng() { return rng_; }

  const node::Node& node(ParticipantId id) const {
    auto it = nodes_.find(id);
    if (it == nodes_.end()) throw Error(Errc::UnknownTarget, node_account(id));
    return it->second;
  }

  nlohmann::json to_json() const {
    nlohmann::json nodes = nlohmann::json::array();
    for (const auto& [_, n] : nodes_) nodes.push_back(n.to_json());
    nlohmann::json gks = nlohmann::json::array();
    for (const auto& [_, g] : gatekeepers_) gks.push_back(g.to_json());
    nlohmann::json passkeys = nlohmann::json::object();
    for (const auto& [name, k] : passkeys_) passkeys[name] = k.secret;
    nlohmann::json cursors = nlohmann::json::object();
    for (const auto& [id, c] : counted_seq_) cursors[std::to_string(id)] = c;
    nlohmann::json snaps = nlohmann::json::object();
    for (const auto& [label, m] : share_snapshots_) {
      nlohmann::json arr = nlohmann::json::array();
      for (const auto& [_, ks] : m) arr.push_back(ks);
      snaps[label] = arr;
    }
    nlohmann::json epochs = nlohmann::json::array();
    for (const auto& e : epochs_)
      epochs.push_back({{"epoch", e.epoch},
                        {"supply_before", e.supply_before},
                        {"supply_after", e.supply_after},
                        {"minted", e.minted},
                        {"inflation", e.inflation},
                        {"rewards", e.rewards}});
    return {{"config", cfg_},
            {"clock", clock_},
            {"next_reattest", next_reattest_},
            {"rng_key", to_hex(rng_.key())},
            {"rng_counter", rng_.counter()},
            {"network", net_.to_json()},
            {"controller", ctrl_.to_json()},
            {"registry", registry_.to_json()},
            {"host", host_.to_json()},
            {"ledger", ledger_.to_json()},
            {"disputes", disputes_.to_json()},
            {"dao", dao_.to_json()},
            {"nodes", nodes},
            {"gatekeepers", gks},
            {"passkeys", passkeys},
            {"counted_seq", cursors},
            {"share_snapshots", snaps},
            {"epochs", epochs},
            {"signatures", signatures_},
            {"direct_attempts", direct_attempts_},
            {"direct_accepted", direct_accepted_},
            {"genesis_public_key", genesis_pk_},
            {"transcript", tx_.to_json()}};
  }

  static World from_json(const nlohmann::json& j) {
    World w;
    w.cfg_ = j.at("config").get<WorldConfig>();
    w.clock_ = j.at("clock");
    w.next_reattest_ = j.at("next_reattest");
    auto key = array_from_hex<32>(j.at("rng_key").get<std::string>());
    if (!key) throw Error(Errc::InvalidEncoding, "rng key");
    w.rng_ = Drbg(*key, j.at("rng_counter").get<std::uint64_t>());
    w.net_ = SimNetwork::from_json(j.at("network"));
    w.ctrl_ = chainstate::Controller::from_json(j.at("controller"));
    w.registry_ = chainstate::KeyRegistry::from_json(j.at("registry"));
    w.host_ = chainsim::ChainHost::from_json(j.at("host"));
    w.ledger_ = econ::Ledger::from_json(j.at("ledger"));
    w.disputes_ = econ::DisputeBook::from_json(j.at("disputes"));
    w.dao_ = econ::Dao::from_json(j.at("dao"));
    for (const auto& nj : j.at("nodes")) {
      auto n = node::Node::from_json(nj);
      auto id = n.id();
      w.nodes_.emplace(id, std::move(n));
    }
    for (const auto& gj : j.at("gatekeepers")) {
      auto g = gatekeeper::Gatekeeper::from_json(gj);
      auto id = g.id();
      w.gatekeepers_.emplace(id, std::move(g));
    }
    for (const auto& [name, s] : j.at("passkeys").items())
      w.passkeys_.emplace(name, KeyPair::from_secret(s.get<SecretScalar>()));
    for (const auto& [id, c] : j.at("counted_seq").items())
      w.counted_seq_[static_cast<ParticipantId>(std::stoul(id))] = c.get<std::uint64_t>();
    for (const auto& [label, arr] : j.at("share_snapshots").items())
      for (const auto& ks : arr) {
        auto share = ks.get<KeyShare>();
        w.share_snapshots_[label].emplace(share.participant_id, share);
      }
    for (const auto& e : j.at("epochs"))
      w.epochs_.push_back({e.at("epoch"), e.at("supply_before"), e.at("supply_after"), e.at("minted"),
                           e.at("inflation"), e.at("rewards").get<std::map<std::string, econ::Amount>>()});
    w.signatures_ = j.at("signatures");
    w.direct_attempts_ = j.at("direct_attempts");
    w.direct_accepted_ = j.at("direct_accepted");
    w.genesis_pk_ = j.at("genesis_public_key").get<PublicKey>();
    w.tx_ = Transcript::from_json(j.at("transcript"));
    return w;
  }

 private:
  World() = default;

  node::ChainView view() {
    return node::ChainView{ctrl_, registry_, host_, [this](std::string_view what, const nlohmann::json& detail) {
                             unsigned step = what == "fetch_config" ? 3 : what == "lookup_authorizer" ? 4 : 5;
                             tx_.record(observe_at_, std::string(what), detail, step);
                           }};
  }

  node::Node& node_at(ParticipantId id) {
    auto it = nodes_.find(id);
    if (it == nodes_.end()) throw Error(Errc::UnknownTarget, node_account(id));
    return it->second;
  }

  bool responsive(ParticipantId id) const {
    auto it = nodes_.find(id);
    return it != nodes_.end() && net_.reachable(id) && it->second.ping();
  }

  void genesis() {
    std::vector<chainstate::ParticipantRecord> records;
    std::map<ParticipantId, KeyPair> enclaves;
    ParticipantList ids;
    for (ParticipantId id = 1; id <= cfg_.nodes; ++id) {
      ids.push_back(id);
      enclaves.emplace(id, KeyPair::generate(rng_));
      records.push_back({id, "sim://" + node_account(id), "", enclaves.at(id).public_key, 0});
    }
    chainstate::ControllerParams params;
    params.attestation_ttl = cfg_.attestation_ttl;
    params.reattest_interval = cfg_.reattest_interval;
    ctrl_ = chainstate::Controller::genesis({records, cfg_.threshold, params});
    for (auto id : ids) {
      auto behavior = cfg_.behaviors.contains(id) ? node::BehaviorMode::parse(cfg_.behaviors.at(id)) : node::BehaviorMode{};
      auto n = node::Node::init(id, std::move(enclaves.at(id)), behavior, ctrl_, 0);
      n.arm(false);
      nodes_.emplace(id, std::move(n));
    }
    tx_.record(0, "genesis", {{"seed", cfg_.seed}, {"nodes", ids}, {"threshold", cfg_.threshold}});

    // The ceremony itself runs with behaviors disarmed.
    const std::string session = "genesis/dkg";
    std::map<ParticipantId, crypto::DkgRound1<Group>> round1;
    for (auto& [id, n] : nodes_) round1.emplace(id, *n.dkg_round1(session, cfg_.threshold, ids, 0, rng_));
    clock_ += 2 * cfg_.network.latency_max;
    tx_.record(clock_, "dkg-round1", {{"dealers", ids}});
    for (auto& [id, n] : nodes_) {
      std::map<ParticipantId, crypto::DealerMessage<Group>> inbox;
      for (const auto& [d, r] : round1) inbox.emplace(d, crypto::DealerMessage<Group>{r.broadcast, r.directed_shares.at(id)});
      auto res = n.dkg_round2(session, round1.at(id).state, inbox, clock_);
      n.install_share(std::get<KeyShare>(std::move(res)), 0, session, node::kDkgComplete, clock_);
      n.arm(true);
    }
    clock_ += 2 * cfg_.network.latency_max;
    ctrl_.report_root_key(nodes_.begin()->second.key_share()->public_package());
    genesis_pk_ = ctrl_.root_package()->group_public_key;
    tx_.record(clock_, "dkg-complete", {{"group_public_key", genesis_pk_}});

    ledger_ = econ::Ledger([&] {
      econ::EconParams p;
      econ::apply_patch(p, cfg_.econ);
      return p;
    }());
    auto fund = [&](const std::string& acct) { ledger_.allocate(acct, cfg_.initial_balance); };
    for (const auto& m : cfg_.dao_members) {
      fund(m);
      ledger_.admit_dao_member(m);
      ledger_.stake(m, econ::Role::DaoMember, cfg_.dao_stake);
    }
    for (auto id : ids) {
      fund(node_account(id));
      ledger_.stake(node_account(id), econ::Role::MpcNode, cfg_.node_stake);
    }
    for (const auto& u : cfg_.users) fund(u);

    for (const auto& gk : cfg_.gatekeepers) {
      auto key = KeyPair::generate(rng_);
      gatekeeper::GatekeeperConfig gc{gk.id,
                                      gk.capacity,
                                      gk.window,
                                      gk.receipt_ttl,
                                      cfg_.network.timeout,
                                      3,
                                      200,
                                      gatekeeper::parse_gatekeeper_behavior(gk.behavior),
                                      cfg_.seed};
      ctrl_.approve_gatekeeper({gk.id, key.public_key, gk.capacity, gk.window, true});
      fund(gk.id);
      ledger_.stake(gk.id, econ::Role::Gatekeeper, gk.stake);
      gatekeepers_.emplace(gk.id, gatekeeper::Gatekeeper(gc, std::move(key)));
    }
    next_reattest_ = cfg_.reattest_interval;
  }

  // Runs re-attestation boundaries that the clock has passed.
  void tick() {
    while (next_reattest_ <= clock_) reattest();
  }

  void reattest() {
    SimTime at = next_reattest_;
    next_reattest_ += cfg_.reattest_interval;
    ParticipantList refreshed, missed;
    auto cfg = ctrl_.fetch_config();
    for (auto id : cfg.participant_ids()) {
      auto& n = nodes_.at(id);
      std::optional<chainstate::AttestationStatement> st;
      if (net_.reachable(id)) st = n.attest(ctrl_.params().code_hash, at);
      if (st) {
        ctrl_.record_attestation(*st, at);
        refreshed.push_back(id);
      } else {
        missed.push_back(id);
      }
    }
    tx_.record(at, "reattest", {{"refreshed", refreshed}, {"missed", missed}});
  }

  void tamper(std::vector<node::TeeLogEntry>& entries) {
    for (auto& e : entries)
      if (auto* v = std::get_if<node::event::ValidationOutcome>(&e.event)) {
        v->authorized = !v->authorized;
        return;
      }
    if (!entries.empty()) entries.front().timestamp += 1;
  }

  // Parallel request/response to `targets`. Each node handles the message
  // at its own arrival time; the exchange ends when the slowest answer
  // arrives or the timeout passes.
  template <class R, class F>
  std::map<ParticipantId, gatekeeper::Reply<R>> exchange(const std::string& session, unsigned round,
                                                         const ParticipantList& targets, F&& call) {
    const SimTime start = clock_;
    const SimTime timeout = cfg_.network.timeout;
    // deterministic per-seed processing order
    ParticipantList order = targets;
    std::sort(order.begin(), order.end(), [&](ParticipantId a, ParticipantId b) {
      auto ha = sha256(ByteWriter().u64(cfg_.seed).str(session).u32(a).bytes());
      auto hb = sha256(ByteWriter().u64(cfg_.seed).str(session).u32(b).bytes());
      return ha < hb;
    });
    std::map<ParticipantId, gatekeeper::Reply<R>> out;
    SimTime done = start;
    for (auto id : order) {
      R reply = std::monostate{};
      SimTime latency = timeout;
      auto there = net_.hop(id);
      if (there) {
        SimTime arrive = start + *there;
        tx_.record(arrive, "deliver", {{"session", session}, {"round", round}, {"to", id}, {"sent", start}},
                   round == 1 ? std::optional<unsigned>(2) : std::optional<unsigned>(6));
        reply = call(nodes_.at(id), arrive);
        if (!std::holds_alternative<std::monostate>(reply)) {
          auto back = net_.hop(id);
          if (back && *there + *back <= timeout)
            latency = *there + *back;
          else
            reply = std::monostate{};
        }
      }
      tx_.record(start + latency, "reply",
                 {{"session", session}, {"round", round}, {"from", id}, {"sent", start}, {"kind", describe(reply)}});
      done = std::max(done, start + latency);
      out.emplace(id, gatekeeper::Reply<R>{std::move(reply), latency});
    }
    clock_ = done;
    return out;
  }

  template <class V>
  static std::string describe(const V& v) {
    if (std::holds_alternative<std::monostate>(v)) return "silence";
    if (const auto* r = std::get_if<node::Refusal>(&v)) return "refusal:" + std::string(to_string(r->code));
    return round_payload_name(v);
  }
  static std::string round_payload_name(const node::Round1Reply&) { return "commitment"; }
  static std::string round_payload_name(const node::Round2Reply&) { return "share"; }

  WorldConfig cfg_;
  Drbg rng_;
  SimNetwork net_;
  SimTime clock_ = 0;
  SimTime next_reattest_ = 0;
  SimTime observe_at_ = 0;
  Transcript tx_;
  chainstate::Controller ctrl_;
  chainstate::KeyRegistry registry_;
  chainsim::ChainHost host_;
  econ::Ledger ledger_;
  econ::DisputeBook disputes_;
  econ::Dao dao_;
  std::map<ParticipantId, node::Node> nodes_;
  std::map<std::string, gatekeeper::Gatekeeper> gatekeepers_;
  std::map<std::string, KeyPair> passkeys_;
  std::map<ParticipantId, std::uint64_t> counted_seq_;
  std::map<std::string, std::map<ParticipantId, KeyShare>> share_snapshots_;
  std::vector<SignOutcome> outcomes_;
  std::vector<EpochRecord> epochs_;
  std::size_t signatures_ = 0;
  unsigned direct_attempts_ = 0;
  bool direct_accepted_ = false;
  PublicKey genesis_pk_;
};

}  // namespace hotmpc::netharness
