#pragma once

#include <map>
#include <string>

#include "hotmpc/chainstate/controller.hpp"
#include "hotmpc/econ/ledger.hpp"
#include "hotmpc/gatekeeper/receipt.hpp"
#include "hotmpc/node/tee_log.hpp"

// Fisherman disputes. A violation predicate is a pure function of the
// evidence and the registered keys; no judgment call is involved.

namespace hotmpc::econ {

enum class Predicate { ReceiptBeyondQuota, SigningWithoutValidation, UnavailabilityStreak };

inline std::string to_string(Predicate p) {
  switch (p) {
    case Predicate::ReceiptBeyondQuota: return "receipt-beyond-quota";
    case Predicate::SigningWithoutValidation: return "signing-without-validation";
    case Predicate::UnavailabilityStreak: return "unavailability-streak";
  }
  return "?";
}

inline Predicate parse_predicate(const std::string& s) {
  if (s == "receipt-beyond-quota") return Predicate::ReceiptBeyondQuota;
  if (s == "signing-without-validation") return Predicate::SigningWithoutValidation;
  if (s == "unavailability-streak") return Predicate::UnavailabilityStreak;
  throw Error(Errc::MalformedRequest, "unknown violation predicate " + s);
}

enum class Severity { Confidentiality, Liveness };
enum class VerdictKind { Upheld, Dismissed, InvalidEvidence };

inline std::string to_string(VerdictKind v) {
  switch (v) {
    case VerdictKind::Upheld: return "upheld";
    case VerdictKind::Dismissed: return "dismissed";
    case VerdictKind::InvalidEvidence: return "invalid-evidence";
  }
  return "?";
}

inline Severity severity_of(Predicate p) {
  return p == Predicate::SigningWithoutValidation ? Severity::Confidentiality : Severity::Liveness;
}

struct Verdict {
  VerdictKind kind = VerdictKind::Dismissed;
  std::string reason;
};

// Registered keys against which evidence is checked.
struct EvidenceContext {
  std::map<ParticipantId, PublicKey> enclave_keys;
  std::map<std::string, chainstate::GatekeeperRecord> gatekeepers;
  unsigned unavailability_streak = 3;

  static EvidenceContext from_controller(const chainstate::Controller& c, unsigned streak) {
    EvidenceContext ctx;
    for (std::uint64_t e = 0; e <= c.epoch(); ++e)
      for (const auto& p : c.fetch_config(e).participants) ctx.enclave_keys[p.participant_id] = p.enclave_identity_key;
    ctx.gatekeepers = c.gatekeepers();
    ctx.unavailability_streak = streak;
    return ctx;
  }
};

inline std::optional<ParticipantId> node_of_account(const std::string& account) {
  if (account.rfind("node-", 0) != 0) return std::nullopt;
  try {
    return static_cast<ParticipantId>(std::stoul(account.substr(5)));
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

namespace detail {

inline Verdict invalid(std::string why) { return {VerdictKind::InvalidEvidence, std::move(why)}; }
inline Verdict dismissed(std::string why) { return {VerdictKind::Dismissed, std::move(why)}; }
inline Verdict upheld(std::string why) { return {VerdictKind::Upheld, std::move(why)}; }

inline Verdict receipts_beyond_quota(const std::string& accused, const nlohmann::json& evidence,
                                     const EvidenceContext& ctx) {
  auto gk = ctx.gatekeepers.find(accused);
  if (gk == ctx.gatekeepers.end()) return invalid("accused is not a registered gatekeeper");
  if (!evidence.contains("receipts") || !evidence.at("receipts").is_array()) return invalid("no receipts");
  std::map<SimTime, std::set<std::uint64_t>> per_window;
  for (const auto& rj : evidence.at("receipts")) {
    gatekeeper::Receipt r;
    try {
      r = rj.get<gatekeeper::Receipt>();
    } catch (const std::exception&) {
      return invalid("malformed receipt");
    }
    if (r.gatekeeper_id != accused) return invalid("receipt from another gatekeeper");
    if (!r.verify(gk->second.public_key)) return invalid("receipt signature does not verify");
    per_window[r.issued_at / gk->second.quota_window].insert(r.serial);
  }
  for (const auto& [w, serials] : per_window)
    if (serials.size() > gk->second.lease_capacity)
      return upheld(std::to_string(serials.size()) + " receipts in window " + std::to_string(w) + ", lease allows " +
                    std::to_string(gk->second.lease_capacity));
  return dismissed("no window exceeds the lease");
}

inline std::optional<std::vector<node::TeeLogEntry>> verified_log(const std::string& text, const EvidenceContext& ctx) {
  std::vector<node::TeeLogEntry> entries;
  try {
    entries = node::parse_jsonl(text);
  } catch (const std::exception&) {
    return std::nullopt;
  }
  if (entries.empty()) return entries;
  auto key = ctx.enclave_keys.find(entries.front().participant_id);
  if (key == ctx.enclave_keys.end() || !node::verify_entries(entries, key->second)) return std::nullopt;
  return entries;
}

inline Verdict signing_without_validation(const std::string& accused, const nlohmann::json& evidence,
                                          const EvidenceContext& ctx) {
  auto id = node_of_account(accused);
  if (!id) return invalid("accused is not a node account");
  if (!evidence.contains("log") || !evidence.at("log").is_string()) return invalid("no log");
  auto entries = verified_log(evidence.at("log").get<std::string>(), ctx);
  if (!entries) return invalid("log entries do not verify");
  if (entries->empty()) return dismissed("empty log");
  if (entries->front().participant_id != *id) return invalid("log belongs to another node");
  // a suffix could hide the validation that preceded it
  if (entries->front().seq != 0) return dismissed("log does not start at the first entry");
  auto violations = node::audit_gating(*entries);
  if (violations.empty()) return dismissed("every share follows a positive validation");
  return upheld("share emitted without validation in session " + violations.front().session);
}

inline Verdict unavailability_streak(const std::string& accused, const nlohmann::json& evidence,
                                     const EvidenceContext& ctx) {
  auto id = node_of_account(accused);
  if (!id) return invalid("accused is not a node account");
  if (!evidence.contains("logs") || !evidence.at("logs").is_array()) return invalid("no logs");
  std::set<std::string> sessions;
  for (const auto& text : evidence.at("logs")) {
    if (!text.is_string()) return invalid("log must be JSON-lines text");
    auto entries = verified_log(text.get<std::string>(), ctx);
    if (!entries) return invalid("log entries do not verify");
    for (const auto& e : *entries)
      if (auto* u = e.as<node::event::NodeUnavailable>(); u && u->peer == *id && e.participant_id != *id)
        sessions.insert(u->session);
  }
  if (sessions.size() >= ctx.unavailability_streak)
    return upheld(std::to_string(sessions.size()) + " sessions report the node unavailable");
  return dismissed(std::to_string(sessions.size()) + " reports, streak needs " +
                   std::to_string(ctx.unavailability_streak));
}

}  // namespace detail

inline Verdict evaluate(Predicate p, const std::string& accused, const nlohmann::json& evidence,
                        const EvidenceContext& ctx) {
  switch (p) {
    case Predicate::ReceiptBeyondQuota: return detail::receipts_beyond_quota(accused, evidence, ctx);
    case Predicate::SigningWithoutValidation: return detail::signing_without_validation(accused, evidence, ctx);
    case Predicate::UnavailabilityStreak: return detail::unavailability_streak(accused, evidence, ctx);
  }
  return detail::invalid("unknown predicate");
}

enum class DisputeStatus { Open, Upheld, Dismissed };

inline std::string to_string(DisputeStatus s) {
  switch (s) {
    case DisputeStatus::Open: return "open";
    case DisputeStatus::Upheld: return "upheld";
    case DisputeStatus::Dismissed: return "dismissed";
  }
  return "?";
}

struct Resolution {
  VerdictKind verdict = VerdictKind::Dismissed;
  std::string reason;
  SlashSplit split;
  Amount fee_refunded = 0;
  Amount fee_forfeited = 0;
};

struct Dispute {
  std::uint64_t id = 0;
  std::string fisherman;
  std::string accused;
  Predicate predicate = Predicate::ReceiptBeyondQuota;
  nlohmann::json evidence;
  Amount fee = 0;
  DisputeStatus status = DisputeStatus::Open;
  std::optional<Resolution> resolution;
};

inline nlohmann::json to_json(const Resolution& r) {
  return {{"verdict", to_string(r.verdict)},
          {"reason", r.reason},
          {"slashed", r.split.slashed},
          {"fisherman_reward", r.split.fisherman},
          {"burned", r.split.burned},
          {"to_treasury", r.split.treasury},
          {"fee_refunded", r.fee_refunded},
          {"fee_forfeited", r.fee_forfeited}};
}

class DisputeBook {
 public:
  std::uint64_t open_dispute(Ledger& ledger, const std::string& fisherman, const std::string& accused,
                             Predicate predicate, nlohmann::json evidence, Amount fee) {
    if (fee < ledger.params().dispute_fee)
      throw Error(Errc::InsufficientFee, "fee " + std::to_string(fee) + " < " + std::to_string(ledger.params().dispute_fee));
    if (ledger.staked(accused) == 0) throw Error(Errc::UnknownAccused, accused);
    ledger.escrow_fee(fisherman, fee);
    auto id = next_++;
    disputes_.emplace(id, Dispute{id, fisherman, accused, predicate, std::move(evidence), fee, DisputeStatus::Open, {}});
    return id;
  }

  // Upheld: slash (whole stake for confidentiality, liveness_slash_bp
  // otherwise), pay the fisherman, refund the fee. Otherwise the fee goes to
  // the treasury; invalid evidence is a dismissal.
  const Resolution& resolve_dispute(Ledger& ledger, std::uint64_t id, const EvidenceContext& ctx) {
    auto it = disputes_.find(id);
    if (it == disputes_.end()) throw Error(Errc::NoActiveProposal, "dispute " + std::to_string(id));
    auto& d = it->second;
    if (d.status != DisputeStatus::Open) throw Error(Errc::AlreadyExecuted, "dispute " + std::to_string(id));
    auto verdict = evaluate(d.predicate, d.accused, d.evidence, ctx);
    Resolution res{verdict.kind, verdict.reason, {}, 0, 0};
    if (verdict.kind == VerdictKind::Upheld) {
      Amount stake = ledger.staked(d.accused);
      Amount amount = severity_of(d.predicate) == Severity::Confidentiality
                          ? stake
                          : static_cast<Amount>((static_cast<unsigned __int128>(stake) * ledger.params().liveness_slash_bp) / 10000);
      res.split = ledger.slash(d.accused, amount, d.fisherman);
      ledger.refund_fee(d.fisherman, d.fee);
      res.fee_refunded = d.fee;
      d.status = DisputeStatus::Upheld;
    } else {
      ledger.forfeit_fee(d.fee);
      res.fee_forfeited = d.fee;
      d.status = DisputeStatus::Dismissed;
    }
    d.resolution = res;
    return *d.resolution;
  }

  const Dispute& get(std::uint64_t id) const {
    auto it = disputes_.find(id);
    if (it == disputes_.end()) throw Error(Errc::NoActiveProposal, "dispute " + std::to_string(id));
    return it->second;
  }
  const std::map<std::uint64_t, Dispute>& all() const { return disputes_; }

  nlohmann::json to_json() const {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& [id, d] : disputes_) {
      nlohmann::json j{{"id", d.id},
                       {"fisherman", d.fisherman},
                       {"accused", d.accused},
                       {"predicate", to_string(d.predicate)},
                       {"evidence", d.evidence},
                       {"fee", d.fee},
                       {"status", to_string(d.status)}};
      if (d.resolution) j["resolution"] = econ::to_json(*d.resolution);
      arr.push_back(j);
    }
    return {{"next", next_}, {"disputes", arr}};
  }

  static DisputeBook from_json(const nlohmann::json& j) {
    DisputeBook b;
    b.next_ = j.at("next");
    for (const auto& dj : j.at("disputes")) {
      Dispute d{dj.at("id"), dj.at("fisherman"), dj.at("accused"), parse_predicate(dj.at("predicate")),
                dj.at("evidence"), dj.at("fee"), DisputeStatus::Open, {}};
      auto status = dj.at("status").get<std::string>();
      d.status = status == "upheld" ? DisputeStatus::Upheld : status == "dismissed" ? DisputeStatus::Dismissed : DisputeStatus::Open;
      if (dj.contains("resolution")) {
        const auto& r = dj.at("resolution");
        auto v = r.at("verdict").get<std::string>();
        Resolution res{v == "upheld" ? VerdictKind::Upheld : v == "dismissed" ? VerdictKind::Dismissed : VerdictKind::InvalidEvidence,
                       r.at("reason"),
                       {r.at("slashed"), r.at("fisherman_reward"), r.at("burned"), r.at("to_treasury")},
                       r.at("fee_refunded"),
                       r.at("fee_forfeited")};
        d.resolution = res;
      }
      b.disputes_.emplace(d.id, std::move(d));
    }
    return b;
  }

 private:
  std::map<std::uint64_t, Dispute> disputes_;
  std::uint64_t next_ = 1;
};

}  // namespace hotmpc::econ
