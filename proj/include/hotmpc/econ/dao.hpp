#pragma once

#include <json.hpp>
#include <map>
#include <set>
#include <string>

#include "hotmpc/econ/ledger.hpp"

// DAO governance over economic parameters, membership and the gatekeeper
// registry. Voting power is one vote per active DAO member. Flagged
// proposals can be vetoed by any single member.

namespace hotmpc::econ {

enum class DaoAction { ParamChange, AdmitMember, ApproveGatekeeper, RemoveGatekeeper };

inline std::string to_string(DaoAction a) {
  switch (a) {
    case DaoAction::ParamChange: return "param-change";
    case DaoAction::AdmitMember: return "admit-member";
    case DaoAction::ApproveGatekeeper: return "approve-gatekeeper";
    case DaoAction::RemoveGatekeeper: return "remove-gatekeeper";
  }
  return "?";
}

inline DaoAction parse_dao_action(const std::string& s) {
  if (s == "param-change") return DaoAction::ParamChange;
  if (s == "admit-member") return DaoAction::AdmitMember;
  if (s == "approve-gatekeeper") return DaoAction::ApproveGatekeeper;
  if (s == "remove-gatekeeper") return DaoAction::RemoveGatekeeper;
  throw Error(Errc::ConfigError, "unknown DAO action " + s);
}

struct DaoProposal {
  std::uint64_t id = 0;
  std::string proposer;
  DaoAction action = DaoAction::ParamChange;
  nlohmann::json payload;
  bool flagged = false;
  std::set<std::string> votes;
  std::set<std::string> vetoes;
  bool executed = false;
};

class Dao {
 public:
  std::uint64_t propose(const Ledger& ledger, const std::string& member, DaoAction action, nlohmann::json payload,
                        bool flagged = false) {
    require_member(ledger, member);
    if (action == DaoAction::ParamChange) {
      EconParams probe = ledger.params();
      apply_patch(probe, payload);
    }
    auto id = next_++;
    proposals_.emplace(id, DaoProposal{id, member, action, std::move(payload), flagged, {member}, {}, false});
    return id;
  }

  void vote(const Ledger& ledger, const std::string& member, std::uint64_t id) {
    require_member(ledger, member);
    auto& p = open(id);
    if (!p.votes.insert(member).second) throw Error(Errc::DuplicateVote, member);
  }

  void veto(const Ledger& ledger, const std::string& member, std::uint64_t id) {
    require_member(ledger, member);
    auto& p = open(id);
    if (!p.flagged) throw Error(Errc::Unauthorized, "proposal " + std::to_string(id) + " is not flagged for veto");
    p.vetoes.insert(member);
  }

  // Counts only votes of members active at execution time. Ledger effects
  // are applied here; registry actions are returned for the caller to apply.
  const DaoProposal& execute(Ledger& ledger, std::uint64_t id) {
    auto& p = open(id);
    if (!p.vetoes.empty()) throw Error(Errc::Unauthorized, "proposal " + std::to_string(id) + " was vetoed");
    auto members = ledger.active(Role::DaoMember);
    std::size_t yes = 0;
    for (const auto& m : members) yes += p.votes.contains(m) ? 1 : 0;
    if (2 * yes <= members.size())
      throw Error(Errc::NoActiveProposal, std::to_string(yes) + " of " + std::to_string(members.size()) +
                                             " members approve proposal " + std::to_string(id));
    switch (p.action) {
      case DaoAction::ParamChange: {
        EconParams next = ledger.pending_params().value_or(ledger.params());
        apply_patch(next, p.payload);
        ledger.schedule_params(next);
        break;
      }
      case DaoAction::AdmitMember: ledger.admit_dao_member(p.payload.at("account").get<std::string>()); break;
      case DaoAction::ApproveGatekeeper:
      case DaoAction::RemoveGatekeeper: break;
    }
    p.executed = true;
    return p;
  }

  const DaoProposal& get(std::uint64_t id) const {
    auto it = proposals_.find(id);
    if (it == proposals_.end()) throw Error(Errc::NoActiveProposal, "DAO proposal " + std::to_string(id));
    return it->second;
  }

  nlohmann::json to_json() const {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& [id, p] : proposals_)
      arr.push_back({{"id", p.id},
                     {"proposer", p.proposer},
                     {"action", to_string(p.action)},
                     {"payload", p.payload},
                     {"flagged", p.flagged},
                     {"votes", p.votes},
                     {"vetoes", p.vetoes},
                     {"executed", p.executed}});
    return {{"next", next_}, {"proposals", arr}};
  }

  static Dao from_json(const nlohmann::json& j) {
    Dao d;
    d.next_ = j.at("next");
    for (const auto& pj : j.at("proposals")) {
      DaoProposal p{pj.at("id"),
                    pj.at("proposer"),
                    parse_dao_action(pj.at("action")),
                    pj.at("payload"),
                    pj.at("flagged"),
                    pj.at("votes").get<std::set<std::string>>(),
                    pj.at("vetoes").get<std::set<std::string>>(),
                    pj.at("executed")};
      d.proposals_.emplace(p.id, std::move(p));
    }
    return d;
  }

 private:
  static void require_member(const Ledger& ledger, const std::string& account) {
    if (!ledger.role_active(account, Role::DaoMember)) throw Error(Errc::NotMember, account);
  }

  DaoProposal& open(std::uint64_t id) {
    auto it = proposals_.find(id);
    if (it == proposals_.end()) throw Error(Errc::NoActiveProposal, "DAO proposal " + std::to_string(id));
    if (it->second.executed) throw Error(Errc::AlreadyExecuted, "DAO proposal " + std::to_string(id));
    return it->second;
  }

  std::map<std::uint64_t, DaoProposal> proposals_;
  std::uint64_t next_ = 1;
};

}  // namespace hotmpc::econ
