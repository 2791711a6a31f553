#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <variant>

#include "hotmpc/chainsim/host.hpp"
#include "hotmpc/chainstate/controller.hpp"
#include "hotmpc/chainstate/registry.hpp"
#include "hotmpc/node/tee_log.hpp"

namespace hotmpc::node {

enum class BehaviorKind { Honest, Stall, RefuseSigning, CorruptShare, StaleAttestation };

// Stall with round 0 stalls everything (signing, resharing, health pings);
// round 1 or 2 stalls only that signing round.
struct BehaviorMode {
  BehaviorKind kind = BehaviorKind::Honest;
  unsigned stall_round = 0;
  friend bool operator==(const BehaviorMode&, const BehaviorMode&) = default;

  bool stalls(unsigned round) const { return kind == BehaviorKind::Stall && (stall_round == 0 || stall_round == round); }

  std::string to_string() const {
    switch (kind) {
      case BehaviorKind::Honest: return "honest";
      case BehaviorKind::Stall: return stall_round == 0 ? "stall" : "stall:" + std::to_string(stall_round);
      case BehaviorKind::RefuseSigning: return "refuse-signing";
      case BehaviorKind::CorruptShare: return "corrupt-share";
      case BehaviorKind::StaleAttestation: return "stale-attestation";
    }
    return "?";
  }

  static BehaviorMode parse(const std::string& s) {
    if (s == "honest") return {};
    if (s == "stall") return {BehaviorKind::Stall, 0};
    if (s == "stall:1") return {BehaviorKind::Stall, 1};
    if (s == "stall:2") return {BehaviorKind::Stall, 2};
    if (s == "refuse-signing") return {BehaviorKind::RefuseSigning, 0};
    if (s == "corrupt-share") return {BehaviorKind::CorruptShare, 0};
    if (s == "stale-attestation") return {BehaviorKind::StaleAttestation, 0};
    throw Error(Errc::ConfigError, "unknown behavior mode " + s);
  }
};

// Read access to the chains a node consults. `observe` lets the harness
// record each read in its transcript.
struct ChainView {
  const chainstate::Controller& controller;
  const chainstate::KeyRegistry& registry;
  const chainsim::ChainHost& host;
  std::function<void(std::string_view, const nlohmann::json&)> observe = {};

  void note(std::string_view what, const nlohmann::json& detail) const {
    if (observe) observe(what, detail);
  }
};

struct Refusal {
  Errc code = Errc::Declined;
  std::string detail;
  friend bool operator==(const Refusal&, const Refusal&) = default;
};

// monostate = the node stays silent
using Round1Reply = std::variant<std::monostate, crypto::NonceCommitment<Group>, Refusal>;
using Round2Reply = std::variant<std::monostate, crypto::SignatureShare<Group>, Refusal>;

class Node {
 public:
  Node(ParticipantId id, KeyPair enclave, BehaviorMode behavior = {})
      : id_(id), enclave_(std::move(enclave)), behavior_(behavior), log_(id) {}

  // Registered-participant check plus the first attestation.
  static Node init(ParticipantId id, KeyPair enclave, BehaviorMode behavior, chainstate::Controller& controller,
                   SimTime now) {
    auto cfg = controller.fetch_config();
    const auto* rec = cfg.find(id);
    if (!rec && cfg.pending_proposal)
      for (const auto& p : cfg.pending_proposal->participants)
        if (p.participant_id == id) rec = &p;
    if (!rec) throw Error(Errc::UnknownParticipant, "", id);
    if (!(rec->enclave_identity_key == enclave.public_key))
      throw Error(Errc::BadSignature, "enclave key differs from the registered one", id);
    Node n(id, std::move(enclave), behavior);
    n.config_epoch_ = cfg.epoch;
    controller.record_attestation(
        chainstate::AttestationStatement::make(id, controller.params().code_hash, now, n.enclave_), now);
    return n;
  }

  ParticipantId id() const { return id_; }
  const BehaviorMode& behavior() const { return behavior_; }
  void set_behavior(BehaviorMode b) { behavior_ = b; }
  // Behaviors are inert until armed; the genesis ceremony runs disarmed.
  void arm(bool on = true) { armed_ = on; }
  bool armed() const { return armed_; }
  const PublicKey& enclave_public_key() const { return enclave_.public_key; }
  const KeyPair& enclave() const { return enclave_; }
  const std::optional<KeyShare>& key_share() const { return key_share_; }
  std::uint64_t config_epoch() const { return config_epoch_; }
  const TeeLog& log() const { return log_; }

  std::vector<TeeLogEntry> export_log(std::uint64_t from = 0, std::uint64_t to = UINT64_MAX) const {
    return log_.range(from, to);
  }

  std::optional<chainstate::AttestationStatement> attest(const Digest32& code_hash, SimTime now) const {
    if (is(BehaviorKind::StaleAttestation)) return std::nullopt;
    return chainstate::AttestationStatement::make(id_, code_hash, now, enclave_);
  }

  bool ping() const { return !stalls(0); }

  // Signing round 1. Checks, in order: deadline, gatekeeper and receipt
  // signature, own attestation, per-gatekeeper lease quota, then the key
  // owner's hot_verify. Only an authorized request reaches sign_round1.
  Round1Reply handle_sign_request(const gatekeeper::Receipt& receipt, const std::string& session,
                                  const ParticipantList& signers, SimTime now, const ChainView& chain, Drbg& rng) {
    if (stalls(1)) return std::monostate{};
    log_.append(event::SigningRequestReceived{session, receipt}, now, enclave_);
    chain.note("fetch_config", {{"node", id_}, {"epoch", chain.controller.epoch()}});

    auto refuse = [&](Errc code, std::string detail) -> Round1Reply {
      log_.append(event::ProtocolError{session, code, detail}, now, enclave_);
      return Refusal{code, std::move(detail)};
    };

    if (now >= receipt.deadline) return refuse(Errc::DeadlineExpired, "deadline " + std::to_string(receipt.deadline));
    auto gk = chain.controller.gatekeeper(receipt.gatekeeper_id);
    if (!gk || !gk->active) return refuse(Errc::UnknownGatekeeper, receipt.gatekeeper_id);
    if (!receipt.verify(gk->public_key)) return refuse(Errc::Unauthorized, "receipt signature");
    if (!chain.controller.is_eligible(id_, now)) return refuse(Errc::AttestationExpired, "");
    if (!key_share_) return refuse(Errc::NotParticipant, "no key share installed");
    if (signers.size() != key_share_->threshold ||
        std::find(signers.begin(), signers.end(), id_) == signers.end())
      return refuse(Errc::WrongSignerCount, "bad signer set");
    if (!count_receipt(*gk, receipt))
      return refuse(Errc::QuotaViolation, receipt.gatekeeper_id + " exceeded its lease");

    bool authorized = false;
    try {
      const auto& entry = chain.registry.lookup_authorizer(receipt.request.key_id);
      chain.note("lookup_authorizer", {{"node", id_}, {"key_id", entry.key_id}, {"contract", entry.contract_address}});
      authorized = chain.host.hot_verify(entry.chain_id, entry.contract_address, receipt.request.message_hex(),
                                         receipt.request.key_id, receipt.request.metadata);
      chain.note("hot_verify", {{"node", id_}, {"contract", entry.contract_address}, {"result", authorized}});
    } catch (const Error& e) {
      // policy faults are refusals, never retries
      log_.append(event::ProtocolError{session, e.code(), e.what()}, now, enclave_);
      authorized = false;
    }
    log_.append(event::ValidationOutcome{session, receipt.request.key_id, authorized}, now, enclave_);
    if (!authorized) return Refusal{Errc::Unauthorized, "hot_verify returned false"};

    if (is(BehaviorKind::RefuseSigning)) {
      log_.append(event::RoundStatus{session, 1, "declined"}, now, enclave_);
      return Refusal{Errc::Declined, "node declines to sign"};
    }

    auto tweaked = crypto::apply_tweak_to_share(*key_share_, receipt.request.key_id);
    auto [commitment, nonces] = crypto::sign_round1(tweaked, rng);
    sessions_.insert_or_assign(session, Session{receipt, signers, std::move(tweaked), std::move(nonces)});
    log_.append(event::RoundStatus{session, 1, std::string(kCommitmentSent)}, now, enclave_);
    return commitment;
  }

  Round2Reply handle_round2(const std::string& session, const crypto::CommitmentList<Group>& commitments, SimTime now) {
    if (stalls(2)) return std::monostate{};
    auto it = sessions_.find(session);
    if (it == sessions_.end()) {
      log_.append(event::ProtocolError{session, Errc::MissingCommitment, "unknown session"}, now, enclave_);
      return Refusal{Errc::MissingCommitment, "unknown session"};
    }
    auto& s = it->second;
    if (now >= s.receipt.deadline) {
      log_.append(event::ProtocolError{session, Errc::DeadlineExpired, ""}, now, enclave_);
      sessions_.erase(it);
      return Refusal{Errc::DeadlineExpired, ""};
    }
    try {
      auto share = crypto::sign_round2(s.share, s.nonces, s.receipt.request.message, s.signers, commitments);
      if (is(BehaviorKind::CorruptShare)) share.z += SecretScalar::one();
      log_.append(event::RoundStatus{session, 2, std::string(kShareEmitted)}, now, enclave_);
      sessions_.erase(it);
      return share;
    } catch (const Error& e) {
      log_.append(event::ProtocolError{session, e.code(), e.what()}, now, enclave_);
      sessions_.erase(it);
      return Refusal{e.code(), e.what()};
    }
  }

  // Coordinator notice that a session was abandoned because of these peers.
  void handle_abort(const std::string& session, const ParticipantList& unavailable, SimTime now) {
    sessions_.erase(session);
    for (auto peer : unavailable)
      if (peer != id_) log_.append(event::NodeUnavailable{session, peer}, now, enclave_);
  }

  // DKG participation. Returns nullopt when stalling.
  std::optional<crypto::DkgRound1<Group>> dkg_round1(const std::string& session, unsigned threshold,
                                                     const ParticipantList& participants, SimTime now, Drbg& rng) {
    if (stalls(0)) return std::nullopt;
    auto r1 = crypto::dkg_round1<Group>(id_, threshold, participants, rng);
    if (is(BehaviorKind::CorruptShare)) {
      for (auto& [to, share] : r1.directed_shares)
        if (to != id_) {
          share += SecretScalar::one();
          break;
        }
    }
    log_.append(event::RoundStatus{session, 1, "dealt"}, now, enclave_);
    return r1;
  }

  crypto::DkgResult<Group> dkg_round2(const std::string& session, const crypto::DkgState<Group>& state,
                                      const std::map<ParticipantId, crypto::DealerMessage<Group>>& received,
                                      SimTime now) {
    auto result = crypto::dkg_round2<Group>(state, received);
    if (auto* complaints = std::get_if<std::vector<crypto::Complaint>>(&result))
      for (const auto& c : *complaints)
        log_.append(event::ProtocolError{session, Errc::ShareVerificationFailed, "complaint against " + std::to_string(c.dealer)},
                    now, enclave_);
    return result;
  }

  std::optional<crypto::VssDealing<Group>> reshare_deal(const std::string& session, const ParticipantList& dealer_set,
                                                        unsigned new_threshold, const ParticipantList& new_participants,
                                                        SimTime now, Drbg& rng) {
    if (stalls(0) || !key_share_) return std::nullopt;
    auto dealing = crypto::reshare_deal<Group>(*key_share_, dealer_set, new_threshold, new_participants, rng);
    if (is(BehaviorKind::CorruptShare)) {
      for (auto& [to, share] : dealing.shares)
        if (to != id_) {
          share += SecretScalar::one();
          break;
        }
    }
    log_.append(event::RoundStatus{session, 1, "dealt"}, now, enclave_);
    return dealing;
  }

  crypto::ReshareResult<Group> reshare_receive(const std::string& session, unsigned new_threshold,
                                               const ParticipantList& new_participants,
                                               const PublicKeyPackage& old_public, const ParticipantList& dealer_set,
                                               const std::map<ParticipantId, crypto::DealerMessage<Group>>& received,
                                               SimTime now) {
    auto result = crypto::reshare_receive<Group>(id_, new_threshold, new_participants, old_public, dealer_set, received);
    if (auto* complaints = std::get_if<std::vector<crypto::Complaint>>(&result))
      for (const auto& c : *complaints)
        log_.append(event::ProtocolError{session, Errc::ShareVerificationFailed, "complaint against " + std::to_string(c.dealer)},
                    now, enclave_);
    return result;
  }

  void install_share(KeyShare share, std::uint64_t epoch, const std::string& session, std::string_view status,
                     SimTime now) {
    if (share.participant_id != id_ || !share.consistent())
      throw Error(Errc::ShareVerificationFailed, "inconsistent key share", id_);
    key_share_ = std::move(share);
    config_epoch_ = epoch;
    sessions_.clear();
    log_.append(event::RoundStatus{session, 2, std::string(status)}, now, enclave_);
  }

  // Excluded by a configuration change: the share is erased.
  void retire(std::uint64_t epoch, const std::string& session, SimTime now) {
    key_share_.reset();
    config_epoch_ = epoch;
    sessions_.clear();
    log_.append(event::RoundStatus{session, 2, "retired"}, now, enclave_);
  }

  void log_error(const std::string& session, Errc code, const std::string& detail, SimTime now) {
    log_.append(event::ProtocolError{session, code, detail}, now, enclave_);
  }

  nlohmann::json to_json() const {
    nlohmann::json quota = nlohmann::json::object();
    for (const auto& [gk, q] : quota_) quota[gk] = {{"window", q.window}, {"serials", q.serials}};
    return {{"participant_id", id_},
            {"enclave_secret", enclave_.secret},
            {"behavior", behavior_.to_string()},
            {"armed", armed_},
            {"config_epoch", config_epoch_},
            {"key_share", key_share_ ? nlohmann::json(*key_share_) : nlohmann::json(nullptr)},
            {"quota", quota},
            {"log", log_.to_json()}};
  }

  static Node from_json(const nlohmann::json& j) {
    Node n(j.at("participant_id"), KeyPair::from_secret(j.at("enclave_secret").get<SecretScalar>()),
           BehaviorMode::parse(j.at("behavior")));
    n.armed_ = j.at("armed");
    n.config_epoch_ = j.at("config_epoch");
    if (!j.at("key_share").is_null()) n.key_share_ = j.at("key_share").get<KeyShare>();
    for (const auto& [gk, q] : j.at("quota").items())
      n.quota_[gk] = {q.at("window"), q.at("serials").get<std::set<std::uint64_t>>()};
    n.log_ = TeeLog::from_json(j.at("log"));
    return n;
  }

 private:
  struct Session {
    gatekeeper::Receipt receipt;
    ParticipantList signers;
    KeyShare share;
    crypto::NoncePair<Group> nonces;
  };
  struct QuotaWindow {
    SimTime window = 0;
    std::set<std::uint64_t> serials;
  };

  bool is(BehaviorKind k) const { return armed_ && behavior_.kind == k; }
  bool stalls(unsigned round) const { return armed_ && behavior_.stalls(round); }

  // Counts distinct receipts per gatekeeper in the fixed window containing
  // issued_at. Retries of one receipt count once.
  bool count_receipt(const chainstate::GatekeeperRecord& gk, const gatekeeper::Receipt& r) {
    auto& q = quota_[gk.gatekeeper_id];
    SimTime window = r.issued_at / gk.quota_window;
    if (window != q.window) q = {window, {}};
    if (q.serials.contains(r.serial)) return true;
    if (q.serials.size() >= gk.lease_capacity) return false;
    q.serials.insert(r.serial);
    return true;
  }

  ParticipantId id_;
  KeyPair enclave_;
  BehaviorMode behavior_;
  bool armed_ = true;
  std::optional<KeyShare> key_share_;
  std::uint64_t config_epoch_ = 0;
  TeeLog log_;
  std::map<std::string, Session> sessions_;
  std::map<std::string, QuotaWindow> quota_;
};

}  // namespace hotmpc::node
