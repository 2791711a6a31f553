#pragma once

#include <algorithm>
#include <json.hpp>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "hotmpc/chainstate/attestation.hpp"
#include "hotmpc/crypto/codec.hpp"

// In-process stand-in for the controller contract. Every mutation is a method
// call on one object, which gives the single total order of an on-chain
// state machine; readers take copies.

namespace hotmpc::chainstate {

struct ParticipantRecord {
  ParticipantId participant_id = 0;
  std::string network_address;
  std::string encryption_public_key;  // hex, opaque to the controller
  PublicKey enclave_identity_key;
  SimTime attestation_expiry = 0;
  friend bool operator==(const ParticipantRecord&, const ParticipantRecord&) = default;
};

enum class ProposalStatus { Pending, Approved, Completed };

constexpr std::string_view to_string(ProposalStatus s) {
  switch (s) {
    case ProposalStatus::Pending: return "pending";
    case ProposalStatus::Approved: return "approved";
    case ProposalStatus::Completed: return "completed";
  }
  return "?";
}

struct ConfigProposal {
  std::uint64_t proposal_id = 0;
  ParticipantId proposer = 0;
  std::vector<ParticipantRecord> participants;
  unsigned threshold = 0;
  std::set<ParticipantId> votes;
  ProposalStatus status = ProposalStatus::Pending;
  friend bool operator==(const ConfigProposal&, const ConfigProposal&) = default;

  ParticipantList participant_ids() const {
    ParticipantList ids;
    for (const auto& p : participants) ids.push_back(p.participant_id);
    return ids;
  }
};

struct NetworkConfig {
  std::uint64_t epoch = 0;
  std::vector<ParticipantRecord> participants;
  unsigned threshold = 0;
  std::optional<ConfigProposal> pending_proposal;
  friend bool operator==(const NetworkConfig&, const NetworkConfig&) = default;

  ParticipantList participant_ids() const {
    ParticipantList ids;
    for (const auto& p : participants) ids.push_back(p.participant_id);
    return ids;
  }
  const ParticipantRecord* find(ParticipantId id) const {
    for (const auto& p : participants)
      if (p.participant_id == id) return &p;
    return nullptr;
  }
};

// Emitted when a proposal reaches quorum; nodes consume it and run resharing.
struct ReshareTrigger {
  std::uint64_t proposal_id = 0;
  std::uint64_t from_epoch = 0;
  ParticipantList old_participants;
  unsigned old_threshold = 0;
  ParticipantList new_participants;
  unsigned new_threshold = 0;
  friend bool operator==(const ReshareTrigger&, const ReshareTrigger&) = default;
};

struct GatekeeperRecord {
  std::string gatekeeper_id;
  PublicKey public_key;
  std::uint32_t lease_capacity = 0;  // receipts per quota window
  SimTime quota_window = 100;
  bool active = true;
  friend bool operator==(const GatekeeperRecord&, const GatekeeperRecord&) = default;
};

struct ControllerParams {
  SimTime attestation_ttl = 100;
  SimTime reattest_interval = 50;
  Digest32 code_hash = default_code_hash();
  // finalize when votes * den > participants * num
  unsigned quorum_num = 1;
  unsigned quorum_den = 2;
  friend bool operator==(const ControllerParams&, const ControllerParams&) = default;
};

struct GenesisConfig {
  std::vector<ParticipantRecord> participants;
  unsigned threshold = 0;
  ControllerParams params;
};

inline void validate_config(const std::vector<ParticipantRecord>& participants, unsigned threshold) {
  if (participants.empty()) throw Error(Errc::InvalidConfig, "participant list is empty");
  if (threshold == 0 || threshold > participants.size())
    throw Error(Errc::InvalidConfig, "threshold " + std::to_string(threshold) + " out of range for " +
                                         std::to_string(participants.size()) + " participants");
  std::set<ParticipantId> seen;
  for (const auto& p : participants) {
    if (p.participant_id == 0) throw Error(Errc::InvalidConfig, "participant id 0 is reserved");
    if (!seen.insert(p.participant_id).second)
      throw Error(Errc::InvalidConfig, "duplicate participant " + std::to_string(p.participant_id));
  }
}

class Controller {
 public:
  Controller() = default;

  static Controller genesis(const GenesisConfig& cfg) {
    validate_config(cfg.participants, cfg.threshold);
    if (cfg.params.quorum_den == 0 || cfg.params.quorum_num >= cfg.params.quorum_den)
      throw Error(Errc::InvalidConfig, "quorum must be a fraction in [0, 1)");
    Controller c;
    c.params_ = cfg.params;
    c.history_.push_back(NetworkConfig{0, cfg.participants, cfg.threshold, std::nullopt});
    return c;
  }

  const ControllerParams& params() const { return params_; }
  std::uint64_t epoch() const { return current().epoch; }

  NetworkConfig fetch_config(std::optional<std::uint64_t> epoch = std::nullopt) const {
    if (!epoch) return current();
    if (*epoch >= history_.size()) throw Error(Errc::UnknownEpoch, "epoch " + std::to_string(*epoch));
    return history_[*epoch];
  }

  std::uint64_t propose_config(ParticipantId proposer, std::vector<ParticipantRecord> participants,
                               unsigned threshold) {
    require_participant(proposer);
    validate_config(participants, threshold);
    auto& cur = current();
    if (cur.pending_proposal && cur.pending_proposal->status != ProposalStatus::Completed)
      throw Error(Errc::InvalidConfig, "a proposal is already open");
    // carry attestation state of members that stay
    for (auto& p : participants)
      if (auto* old = cur.find(p.participant_id)) p.attestation_expiry = old->attestation_expiry;
    cur.pending_proposal = ConfigProposal{next_proposal_id_++, proposer, std::move(participants), threshold, {},
                                          ProposalStatus::Pending};
    return cur.pending_proposal->proposal_id;
  }

  void vote(ParticipantId voter, std::uint64_t proposal_id) {
    require_participant(voter);
    auto& p = open_proposal(proposal_id);
    if (p.status != ProposalStatus::Pending) throw Error(Errc::NoActiveProposal, "proposal already approved");
    if (!p.votes.insert(voter).second) throw Error(Errc::DuplicateVote, "", voter);
  }

  // Returns the trigger once quorum is reached; nullopt while pending.
  std::optional<ReshareTrigger> finalize() {
    auto& cur = current();
    if (!cur.pending_proposal || cur.pending_proposal->status == ProposalStatus::Completed)
      throw Error(Errc::NoActiveProposal, "nothing to finalize");
    auto& p = *cur.pending_proposal;
    if (p.status == ProposalStatus::Pending) {
      std::uint64_t lhs = std::uint64_t(p.votes.size()) * params_.quorum_den;
      std::uint64_t rhs = std::uint64_t(cur.participants.size()) * params_.quorum_num;
      if (lhs <= rhs) return std::nullopt;
      p.status = ProposalStatus::Approved;
    }
    return ReshareTrigger{p.proposal_id, cur.epoch, cur.participant_ids(), cur.threshold, p.participant_ids(),
                          p.threshold};
  }

  // Resharing finished: the proposal becomes the config of the next epoch.
  // The reported key must be the one already on record.
  void complete_reshare(std::uint64_t proposal_id, const PublicKeyPackage& new_package) {
    auto& p = open_proposal(proposal_id);
    if (p.status != ProposalStatus::Approved) throw Error(Errc::NoActiveProposal, "proposal has not reached quorum");
    if (root_package_ && !(root_package_->group_public_key == new_package.group_public_key))
      throw Error(Errc::MixedPublicKeys, "resharing changed the root public key");
    if (new_package.threshold != p.threshold || new_package.participants() != sorted(p.participant_ids()))
      throw Error(Errc::InvalidConfig, "package does not match the approved proposal");
    NetworkConfig next{current().epoch + 1, p.participants, p.threshold, std::nullopt};
    p.status = ProposalStatus::Completed;
    history_.push_back(std::move(next));
    root_package_ = new_package;
  }

  // Called after the genesis DKG. Idempotent for identical reports.
  void report_root_key(const PublicKeyPackage& pkg) {
    if (root_package_) {
      if (!(*root_package_ == pkg)) throw Error(Errc::MixedPublicKeys, "conflicting root key report");
      return;
    }
    if (pkg.threshold != current().threshold || pkg.participants() != sorted(current().participant_ids()))
      throw Error(Errc::InvalidConfig, "root key package does not match the current config");
    root_package_ = pkg;
  }

  const std::optional<PublicKeyPackage>& root_package() const { return root_package_; }

  SimTime record_attestation(const AttestationStatement& st, SimTime now) {
    auto* rec = mutable_record(st.participant_id);
    if (!rec) throw Error(Errc::UnknownParticipant, "", st.participant_id);
    if (!crypto::verify(st.signing_bytes(), st.signature, rec->enclave_identity_key))
      throw Error(Errc::BadSignature, "attestation signature", st.participant_id);
    if (st.code_hash != params_.code_hash)
      throw Error(Errc::CodeIdentityMismatch, to_hex(st.code_hash), st.participant_id);
    SimTime expiry = now + params_.attestation_ttl;
    set_expiry(st.participant_id, expiry);
    return expiry;
  }

  bool is_eligible(ParticipantId id, SimTime now) const {
    const auto* rec = current().find(id);
    return rec && rec->attestation_expiry >= now;
  }

  ParticipantList eligible_participants(SimTime now) const {
    ParticipantList out;
    for (const auto& p : current().participants)
      if (p.attestation_expiry >= now) out.push_back(p.participant_id);
    return out;
  }

  void approve_gatekeeper(GatekeeperRecord rec) {
    if (rec.gatekeeper_id.empty() || rec.lease_capacity == 0 || rec.quota_window == 0)
      throw Error(Errc::InvalidConfig, "gatekeeper record incomplete");
    rec.active = true;
    gatekeepers_[rec.gatekeeper_id] = std::move(rec);
  }

  void remove_gatekeeper(const std::string& id) {
    auto it = gatekeepers_.find(id);
    if (it == gatekeepers_.end()) throw Error(Errc::UnknownGatekeeper, id);
    it->second.active = false;
  }

  std::optional<GatekeeperRecord> gatekeeper(const std::string& id) const {
    auto it = gatekeepers_.find(id);
    if (it == gatekeepers_.end()) return std::nullopt;
    return it->second;
  }
  const std::map<std::string, GatekeeperRecord>& gatekeepers() const { return gatekeepers_; }

  nlohmann::json to_json() const;
  static Controller from_json(const nlohmann::json& j);
  friend bool operator==(const Controller&, const Controller&) = default;

 private:
  static ParticipantList sorted(ParticipantList ids) {
    std::sort(ids.begin(), ids.end());
    return ids;
  }

  NetworkConfig& current() { return history_.back(); }
  const NetworkConfig& current() const { return history_.back(); }

  void require_participant(ParticipantId id) const {
    if (!current().find(id)) throw Error(Errc::NotParticipant, "", id);
  }

  ConfigProposal& open_proposal(std::uint64_t proposal_id) {
    auto& cur = current();
    if (!cur.pending_proposal || cur.pending_proposal->proposal_id != proposal_id ||
        cur.pending_proposal->status == ProposalStatus::Completed)
      throw Error(Errc::NoActiveProposal, "proposal " + std::to_string(proposal_id));
    return *cur.pending_proposal;
  }

  // Joiners named only in the open proposal may attest before they are active.
  ParticipantRecord* mutable_record(ParticipantId id) {
    auto& cur = current();
    for (auto& p : cur.participants)
      if (p.participant_id == id) return &p;
    if (cur.pending_proposal)
      for (auto& p : cur.pending_proposal->participants)
        if (p.participant_id == id) return &p;
    return nullptr;
  }

  void set_expiry(ParticipantId id, SimTime expiry) {
    auto& cur = current();
    for (auto& p : cur.participants)
      if (p.participant_id == id) p.attestation_expiry = expiry;
    if (cur.pending_proposal)
      for (auto& p : cur.pending_proposal->participants)
        if (p.participant_id == id) p.attestation_expiry = expiry;
  }

  ControllerParams params_;
  std::vector<NetworkConfig> history_;
  std::optional<PublicKeyPackage> root_package_;
  std::map<std::string, GatekeeperRecord> gatekeepers_;
  std::uint64_t next_proposal_id_ = 1;
};

// JSON

inline void to_json(nlohmann::json& j, const ParticipantRecord& p) {
  j = {{"participant_id", p.participant_id},
       {"network_address", p.network_address},
       {"encryption_public_key", p.encryption_public_key},
       {"enclave_identity_key", p.enclave_identity_key},
       {"attestation_expiry", p.attestation_expiry}};
}
inline void from_json(const nlohmann::json& j, ParticipantRecord& p) {
  p.participant_id = j.at("participant_id");
  p.network_address = j.at("network_address");
  p.encryption_public_key = j.at("encryption_public_key");
  p.enclave_identity_key = j.at("enclave_identity_key").get<PublicKey>();
  p.attestation_expiry = j.at("attestation_expiry");
}

inline void to_json(nlohmann::json& j, const ConfigProposal& p) {
  j = {{"proposal_id", p.proposal_id}, {"proposer", p.proposer},   {"participants", p.participants},
       {"threshold", p.threshold},     {"votes", p.votes},         {"status", to_string(p.status)}};
}
inline void from_json(const nlohmann::json& j, ConfigProposal& p) {
  p.proposal_id = j.at("proposal_id");
  p.proposer = j.at("proposer");
  p.participants = j.at("participants").get<std::vector<ParticipantRecord>>();
  p.threshold = j.at("threshold");
  p.votes = j.at("votes").get<std::set<ParticipantId>>();
  auto s = j.at("status").get<std::string>();
  if (s == "pending") p.status = ProposalStatus::Pending;
  else if (s == "approved") p.status = ProposalStatus::Approved;
  else if (s == "completed") p.status = ProposalStatus::Completed;
  else throw Error(Errc::InvalidEncoding, "proposal status " + s);
}

inline void to_json(nlohmann::json& j, const NetworkConfig& c) {
  j = {{"epoch", c.epoch}, {"participants", c.participants}, {"threshold", c.threshold}};
  j["pending_proposal"] = c.pending_proposal ? nlohmann::json(*c.pending_proposal) : nlohmann::json(nullptr);
}
inline void from_json(const nlohmann::json& j, NetworkConfig& c) {
  c.epoch = j.at("epoch");
  c.participants = j.at("participants").get<std::vector<ParticipantRecord>>();
  c.threshold = j.at("threshold");
  c.pending_proposal.reset();
  if (j.contains("pending_proposal") && !j.at("pending_proposal").is_null())
    c.pending_proposal = j.at("pending_proposal").get<ConfigProposal>();
}

inline void to_json(nlohmann::json& j, const GatekeeperRecord& g) {
  j = {{"gatekeeper_id", g.gatekeeper_id}, {"public_key", g.public_key},   {"lease_capacity", g.lease_capacity},
       {"quota_window", g.quota_window},   {"active", g.active}};
}
inline void from_json(const nlohmann::json& j, GatekeeperRecord& g) {
  g.gatekeeper_id = j.at("gatekeeper_id");
  g.public_key = j.at("public_key").get<PublicKey>();
  g.lease_capacity = j.at("lease_capacity");
  g.quota_window = j.at("quota_window");
  g.active = j.at("active");
}

inline void to_json(nlohmann::json& j, const ControllerParams& p) {
  j = {{"attestation_ttl", p.attestation_ttl},
       {"reattest_interval", p.reattest_interval},
       {"code_hash", to_hex(p.code_hash)},
       {"quorum_num", p.quorum_num},
       {"quorum_den", p.quorum_den}};
}
inline void from_json(const nlohmann::json& j, ControllerParams& p) {
  p = ControllerParams{};
  if (j.contains("attestation_ttl")) p.attestation_ttl = j.at("attestation_ttl");
  if (j.contains("reattest_interval")) p.reattest_interval = j.at("reattest_interval");
  if (j.contains("code_hash")) {
    auto h = array_from_hex<32>(j.at("code_hash").get<std::string>());
    if (!h) throw Error(Errc::InvalidEncoding, "code_hash");
    p.code_hash = *h;
  }
  if (j.contains("quorum_num")) p.quorum_num = j.at("quorum_num");
  if (j.contains("quorum_den")) p.quorum_den = j.at("quorum_den");
}

inline nlohmann::json Controller::to_json() const {
  nlohmann::json gks = nlohmann::json::array();
  for (const auto& [id, g] : gatekeepers_) gks.push_back(g);
  return {{"params", params_},
          {"history", history_},
          {"root_package", root_package_ ? nlohmann::json(*root_package_) : nlohmann::json(nullptr)},
          {"gatekeepers", gks},
          {"next_proposal_id", next_proposal_id_}};
}

inline Controller Controller::from_json(const nlohmann::json& j) {
  Controller c;
  c.params_ = j.at("params").get<ControllerParams>();
  c.history_ = j.at("history").get<std::vector<NetworkConfig>>();
  if (c.history_.empty()) throw Error(Errc::InvalidConfig, "controller snapshot without history");
  if (!j.at("root_package").is_null()) c.root_package_ = j.at("root_package").get<PublicKeyPackage>();
  for (const auto& g : j.at("gatekeepers")) {
    auto rec = g.get<GatekeeperRecord>();
    c.gatekeepers_.emplace(rec.gatekeeper_id, rec);
  }
  c.next_proposal_id_ = j.at("next_proposal_id");
  return c;
}

}  // namespace hotmpc::chainstate
