#pragma once

#include <map>
#include <string>
#include <vector>

#include "hotmpc/gatekeeper/receipt.hpp"
#include "hotmpc/gatekeeper/selection.hpp"
#include "hotmpc/node/node.hpp"

namespace hotmpc::gatekeeper {

enum class GatekeeperBehavior { Honest, IgnoreQuota, Offline };

inline std::string to_string(GatekeeperBehavior b) {
  switch (b) {
    case GatekeeperBehavior::Honest: return "honest";
    case GatekeeperBehavior::IgnoreQuota: return "ignore-quota";
    case GatekeeperBehavior::Offline: return "offline";
  }
  return "?";
}

inline GatekeeperBehavior parse_gatekeeper_behavior(const std::string& s) {
  if (s == "honest") return GatekeeperBehavior::Honest;
  if (s == "ignore-quota") return GatekeeperBehavior::IgnoreQuota;
  if (s == "offline") return GatekeeperBehavior::Offline;
  throw Error(Errc::ConfigError, "unknown gatekeeper behavior " + s);
}

// A reply with monostate in `value` means the node did not answer in time.
template <class R>
struct Reply {
  R value;
  SimTime latency = 0;
};

// How a gatekeeper reaches nodes. The harness implements this on top of its
// simulated network; each call advances virtual time.
class SignerTransport {
 public:
  virtual ~SignerTransport() = default;
  virtual SimTime now() const = 0;
  virtual const chainstate::Controller& controller() const = 0;
  virtual std::map<ParticipantId, Reply<node::Round1Reply>> round1(const Receipt& receipt, const std::string& session,
                                                                  const ParticipantList& signers) = 0;
  virtual std::map<ParticipantId, Reply<node::Round2Reply>> round2(const std::string& session,
                                                                  const ParticipantList& signers,
                                                                  const crypto::CommitmentList<Group>& commitments) = 0;
  virtual void abort(const std::string& session, const ParticipantList& recipients,
                     const ParticipantList& unavailable) = 0;
  // True when every listed node answers a health ping.
  virtual bool probe(const ParticipantList& ids) = 0;
};

struct GatekeeperConfig {
  std::string id;
  std::uint32_t capacity = 10;
  SimTime window = 100;
  SimTime receipt_ttl = 50;
  SimTime timeout = 10;
  unsigned max_reselections = 3;
  SimTime blacklist_for = 200;
  GatekeeperBehavior behavior = GatekeeperBehavior::Honest;
  std::uint64_t seed = 0;
};

struct SubmitResult {
  Signature signature;
  Receipt receipt;
  ParticipantList signers;
  unsigned attempts = 0;
  ParticipantList blacklisted;  // added during this request
};

class Gatekeeper {
 public:
  Gatekeeper(GatekeeperConfig cfg, KeyPair key)
      : cfg_(std::move(cfg)), key_(std::move(key)), quota_(cfg_.capacity, cfg_.window) {}

  const std::string& id() const { return cfg_.id; }
  const GatekeeperConfig& config() const { return cfg_; }
  const PublicKey& public_key() const { return key_.public_key; }
  const KeyPair& key() const { return key_; }
  GatekeeperBehavior behavior() const { return cfg_.behavior; }
  void set_behavior(GatekeeperBehavior b) { cfg_.behavior = b; }
  const std::vector<Receipt>& receipt_log() const { return receipts_; }
  const Blacklist& blacklist() const { return blacklist_; }
  const ResponsivenessScores& scores() const { return scores_; }
  const FixedWindowQuota& quota() const { return quota_; }

  SubmitResult submit(const SignRequest& request, SignerTransport& tx) {
    if (cfg_.behavior == GatekeeperBehavior::Offline) throw Error(Errc::Timeout, cfg_.id + " is offline");
    check_request(request);
    SimTime now = tx.now();
    if (cfg_.behavior == GatekeeperBehavior::IgnoreQuota)
      quota_.force_admit(now);
    else if (!quota_.try_admit(now))
      throw Error(Errc::QuotaExceeded, cfg_.id + " used " + std::to_string(quota_.capacity()) + " of its window");

    auto receipt = Receipt::issue(cfg_.id, serial_++, request, now, cfg_.receipt_ttl, key_);
    receipts_.push_back(receipt);

    const auto& ctrl = tx.controller();
    if (!ctrl.root_package()) throw Error(Errc::ThresholdUnavailable, "network has no key yet");
    auto child = crypto::derive_child_package(*ctrl.root_package(), request.key_id);
    unsigned t = ctrl.fetch_config().threshold;

    SubmitResult result{{}, receipt, {}, 0, {}};
    for (unsigned attempt = 0; attempt <= cfg_.max_reselections; ++attempt) {
      now = tx.now();
      if (now >= receipt.deadline) throw Error(Errc::ThresholdUnavailable, "receipt deadline passed");
      auto eligible = tx.controller().eligible_participants(now);
      if (available(eligible, now) < t) rehabilitate(eligible, tx);
      auto signers = select_signers(eligible, t, scores_, blacklist_, now, cfg_.seed ^ (receipt.serial << 8) ^ attempt);
      result.attempts = attempt + 1;
      auto session = cfg_.id + "/" + std::to_string(receipt.serial) + "/" + std::to_string(attempt);

      ParticipantList failed;
      crypto::CommitmentList<Group> commitments;
      for (auto& [id, reply] : tx.round1(receipt, session, signers)) {
        if (auto* c = std::get_if<crypto::NonceCommitment<Group>>(&reply.value)) {
          scores_.observe(id, static_cast<double>(reply.latency));
          commitments.emplace(id, *c);
        } else {
          handle_failure(id, reply.value, session, signers, failed, tx);
        }
      }
      if (!failed.empty()) {
        give_up_attempt(session, signers, failed, result, tx);
        continue;
      }

      std::map<ParticipantId, crypto::SignatureShare<Group>> shares;
      for (auto& [id, reply] : tx.round2(session, signers, commitments)) {
        if (auto* s = std::get_if<crypto::SignatureShare<Group>>(&reply.value)) {
          scores_.observe(id, static_cast<double>(reply.latency));
          shares.emplace(id, *s);
        } else {
          handle_failure(id, reply.value, session, signers, failed, tx);
        }
      }
      if (!failed.empty()) {
        give_up_attempt(session, signers, failed, result, tx);
        continue;
      }

      try {
        result.signature = crypto::sign_aggregate<Group>(request.message, signers, commitments, shares, child);
      } catch (const Error& e) {
        if (e.code() != Errc::InvalidSignatureShare || !e.party()) throw;
        failed.push_back(*e.party());
        give_up_attempt(session, signers, failed, result, tx);
        continue;
      }
      result.signers = signers;
      return result;
    }
    throw Error(Errc::ThresholdUnavailable, "no responsive signer set after " +
                                                std::to_string(cfg_.max_reselections + 1) + " attempts");
  }

  // Group-tests the candidates; responsive blacklisted nodes are
  // rehabilitated, unresponsive ones (re)blacklisted.
  GroupTestResult health_check(const ParticipantList& candidates, SignerTransport& tx) {
    auto res = group_test(candidates, [&](const ParticipantList& set) { return tx.probe(set); });
    SimTime now = tx.now();
    std::set<ParticipantId> bad(res.defectives.begin(), res.defectives.end());
    for (auto id : candidates) {
      if (bad.contains(id))
        blacklist_.add(id, now + cfg_.blacklist_for);
      else
        blacklist_.remove(id);
    }
    return res;
  }

  nlohmann::json to_json() const {
    nlohmann::json receipts = nlohmann::json::array();
    for (const auto& r : receipts_) receipts.push_back(r);
    return {{"id", cfg_.id},
            {"capacity", cfg_.capacity},
            {"window", cfg_.window},
            {"receipt_ttl", cfg_.receipt_ttl},
            {"timeout", cfg_.timeout},
            {"max_reselections", cfg_.max_reselections},
            {"blacklist_for", cfg_.blacklist_for},
            {"behavior", to_string(cfg_.behavior)},
            {"seed", cfg_.seed},
            {"secret", key_.secret},
            {"serial", serial_},
            {"quota", quota_.to_json()},
            {"blacklist", blacklist_.to_json()},
            {"scores", scores_.to_json()},
            {"receipts", receipts}};
  }

  static Gatekeeper from_json(const nlohmann::json& j) {
    GatekeeperConfig cfg{j.at("id"),
                         j.at("capacity"),
                         j.at("window"),
                         j.at("receipt_ttl"),
                         j.at("timeout"),
                         j.at("max_reselections"),
                         j.at("blacklist_for"),
                         parse_gatekeeper_behavior(j.at("behavior")),
                         j.at("seed")};
    Gatekeeper g(cfg, KeyPair::from_secret(j.at("secret").get<SecretScalar>()));
    g.serial_ = j.at("serial");
    g.quota_ = FixedWindowQuota::from_json(j.at("quota"));
    g.blacklist_ = Blacklist::from_json(j.at("blacklist"));
    g.scores_ = ResponsivenessScores::from_json(j.at("scores"));
    for (const auto& r : j.at("receipts")) g.receipts_.push_back(r.get<Receipt>());
    return g;
  }

 private:
  std::size_t available(const ParticipantList& eligible, SimTime now) const {
    return static_cast<std::size_t>(
        std::count_if(eligible.begin(), eligible.end(), [&](ParticipantId id) { return !blacklist_.contains(id, now); }));
  }

  void rehabilitate(const ParticipantList& eligible, SignerTransport& tx) {
    ParticipantList listed;
    for (auto id : eligible)
      if (blacklist_.contains(id, tx.now())) listed.push_back(id);
    if (!listed.empty()) health_check(listed, tx);
  }

  // Refusals that no other signer set can fix end the request at once.
  static bool terminal(Errc code) {
    return code == Errc::Unauthorized || code == Errc::QuotaViolation || code == Errc::UnknownGatekeeper ||
           code == Errc::DeadlineExpired;
  }

  template <class V>
  void handle_failure(ParticipantId id, const V& value, const std::string& session, const ParticipantList& signers,
                      ParticipantList& failed, SignerTransport& tx) {
    if (const auto* refusal = std::get_if<node::Refusal>(&value)) {
      if (terminal(refusal->code)) {
        tx.abort(session, signers, {});
        throw Error(refusal->code, "node " + std::to_string(id) + ": " + refusal->detail, id);
      }
    } else {
      scores_.observe(id, static_cast<double>(2 * cfg_.timeout));
    }
    failed.push_back(id);
  }

  void give_up_attempt(const std::string& session, const ParticipantList& signers, const ParticipantList& failed,
                       SubmitResult& result, SignerTransport& tx) {
    SimTime now = tx.now();
    for (auto id : failed) {
      blacklist_.add(id, now + cfg_.blacklist_for);
      result.blacklisted.push_back(id);
    }
    ParticipantList rest;
    for (auto id : signers)
      if (std::find(failed.begin(), failed.end(), id) == failed.end()) rest.push_back(id);
    tx.abort(session, rest, failed);
  }

  GatekeeperConfig cfg_;
  KeyPair key_;
  FixedWindowQuota quota_;
  Blacklist blacklist_;
  ResponsivenessScores scores_;
  std::vector<Receipt> receipts_;
  std::uint64_t serial_ = 0;
};

}  // namespace hotmpc::gatekeeper
