#pragma once

#include <json.hpp>
#include <set>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "hotmpc/gatekeeper/receipt.hpp"

// Append-only, enclave-signed event log. Each entry signs
// (participant || seq || timestamp || canonical event JSON); the JSON-lines
// export is the wire format for dispute evidence.

namespace hotmpc::node {

namespace event {
struct SigningRequestReceived {
  std::string session;
  gatekeeper::Receipt receipt;
  friend bool operator==(const SigningRequestReceived&, const SigningRequestReceived&) = default;
};
struct ValidationOutcome {
  std::string session;
  KeyId key_id;
  bool authorized = false;
  friend bool operator==(const ValidationOutcome&, const ValidationOutcome&) = default;
};
struct RoundStatus {
  std::string session;
  unsigned round = 0;
  std::string status;
  friend bool operator==(const RoundStatus&, const RoundStatus&) = default;
};
struct NodeUnavailable {
  std::string session;
  ParticipantId peer = 0;
  friend bool operator==(const NodeUnavailable&, const NodeUnavailable&) = default;
};
struct ProtocolError {
  std::string session;
  Errc code = Errc::ConfigError;
  std::string detail;
  friend bool operator==(const ProtocolError&, const ProtocolError&) = default;
};
}  // namespace event

using LogEvent = std::variant<event::SigningRequestReceived, event::ValidationOutcome, event::RoundStatus,
                              event::NodeUnavailable, event::ProtocolError>;

// Round-status strings with meaning to auditors.
inline constexpr std::string_view kShareEmitted = "share-emitted";
inline constexpr std::string_view kCommitmentSent = "commitment-sent";
inline constexpr std::string_view kDkgComplete = "dkg-complete";
inline constexpr std::string_view kReshareComplete = "reshare-complete";

inline nlohmann::json event_to_json(const LogEvent& ev) {
  using nlohmann::json;
  return std::visit(
      [](const auto& e) -> json {
        using T = std::decay_t<decltype(e)>;
        if constexpr (std::is_same_v<T, event::SigningRequestReceived>)
          return {{"type", "SigningRequestReceived"}, {"session", e.session}, {"receipt", e.receipt}};
        else if constexpr (std::is_same_v<T, event::ValidationOutcome>)
          return {{"type", "ValidationOutcome"}, {"session", e.session}, {"key_id", e.key_id}, {"authorized", e.authorized}};
        else if constexpr (std::is_same_v<T, event::RoundStatus>)
          return {{"type", "RoundStatus"}, {"session", e.session}, {"round", e.round}, {"status", e.status}};
        else if constexpr (std::is_same_v<T, event::NodeUnavailable>)
          return {{"type", "NodeUnavailable"}, {"session", e.session}, {"peer", e.peer}};
        else
          return {{"type", "ProtocolError"}, {"session", e.session}, {"code", to_string(e.code)}, {"detail", e.detail}};
      },
      ev);
}

inline LogEvent event_from_json(const nlohmann::json& j) {
  auto type = j.at("type").get<std::string>();
  auto session = j.at("session").get<std::string>();
  if (type == "SigningRequestReceived") return event::SigningRequestReceived{session, j.at("receipt").get<gatekeeper::Receipt>()};
  if (type == "ValidationOutcome") return event::ValidationOutcome{session, j.at("key_id").get<KeyId>(), j.at("authorized")};
  if (type == "RoundStatus") return event::RoundStatus{session, j.at("round"), j.at("status")};
  if (type == "NodeUnavailable") return event::NodeUnavailable{session, j.at("peer")};
  if (type == "ProtocolError") {
    auto code = errc_from_string(j.at("code").get<std::string>());
    if (!code) throw Error(Errc::InvalidEncoding, "unknown error code in log");
    return event::ProtocolError{session, *code, j.at("detail")};
  }
  throw Error(Errc::InvalidEncoding, "unknown log event " + type);
}

struct TeeLogEntry {
  ParticipantId participant_id = 0;
  std::uint64_t seq = 0;
  SimTime timestamp = 0;
  LogEvent event;
  Signature signature;
  friend bool operator==(const TeeLogEntry&, const TeeLogEntry&) = default;

  Bytes signing_bytes() const {
    return ByteWriter()
        .str("HOTMPC-v1/tee-log")
        .u32(participant_id)
        .u64(seq)
        .u64(timestamp)
        .str(event_to_json(event).dump())
        .bytes();
  }

  bool verify(const PublicKey& enclave_key) const { return crypto::verify(signing_bytes(), signature, enclave_key); }

  nlohmann::json to_json() const {
    return {{"participant_id", participant_id},
            {"seq", seq},
            {"timestamp", timestamp},
            {"event", event_to_json(event)},
            {"signature", signature}};
  }

  static TeeLogEntry from_json(const nlohmann::json& j) {
    return {j.at("participant_id"), j.at("seq"), j.at("timestamp"), event_from_json(j.at("event")),
            j.at("signature").get<Signature>()};
  }

  template <class E>
  const E* as() const {
    return std::get_if<E>(&event);
  }
};

inline std::string export_jsonl(const std::vector<TeeLogEntry>& entries) {
  std::string out;
  for (const auto& e : entries) out += e.to_json().dump() + "\n";
  return out;
}

// Strict parse: every line must be the canonical serialization of the entry
// it decodes to, so formatting games cannot smuggle extra content.
inline std::vector<TeeLogEntry> parse_jsonl(const std::string& text) {
  std::vector<TeeLogEntry> out;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    TeeLogEntry entry;
    try {
      entry = TeeLogEntry::from_json(nlohmann::json::parse(line));
    } catch (const Error&) {
      throw;
    } catch (const std::exception& e) {
      throw Error(Errc::InvalidEncoding, std::string("log line: ") + e.what());
    }
    if (entry.to_json().dump() != line) throw Error(Errc::InvalidEncoding, "non-canonical log line");
    out.push_back(std::move(entry));
  }
  return out;
}

// Signatures verify and sequence numbers are gapless from the first entry.
inline bool verify_entries(const std::vector<TeeLogEntry>& entries, const PublicKey& enclave_key) {
  for (std::size_t i = 0; i < entries.size(); ++i) {
    if (!entries[i].verify(enclave_key)) return false;
    if (i > 0 && entries[i].seq != entries[i - 1].seq + 1) return false;
    if (entries[i].participant_id != entries.front().participant_id) return false;
  }
  return true;
}

class TeeLog {
 public:
  explicit TeeLog(ParticipantId owner = 0) : owner_(owner) {}

  const TeeLogEntry& append(LogEvent ev, SimTime now, const KeyPair& enclave) {
    TeeLogEntry e{owner_, entries_.size(), now, std::move(ev), {}};
    e.signature = enclave.sign(e.signing_bytes());
    entries_.push_back(std::move(e));
    return entries_.back();
  }

  const std::vector<TeeLogEntry>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }

  std::vector<TeeLogEntry> range(std::uint64_t from, std::uint64_t to) const {
    std::vector<TeeLogEntry> out;
    for (const auto& e : entries_)
      if (e.seq >= from && e.seq < to) out.push_back(e);
    return out;
  }

  nlohmann::json to_json() const {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& e : entries_) arr.push_back(e.to_json());
    return {{"owner", owner_}, {"entries", arr}};
  }
  static TeeLog from_json(const nlohmann::json& j) {
    TeeLog log(j.at("owner").get<ParticipantId>());
    for (const auto& e : j.at("entries")) log.entries_.push_back(TeeLogEntry::from_json(e));
    return log;
  }

 private:
  ParticipantId owner_;
  std::vector<TeeLogEntry> entries_;
};

// Gating audit: every emitted signature share is preceded, in the same log,
// by ValidationOutcome(authorized = true) for the same session.
struct GatingViolation {
  ParticipantId participant_id;
  std::uint64_t seq;
  std::string session;
};

inline std::vector<GatingViolation> audit_gating(const std::vector<TeeLogEntry>& entries) {
  std::vector<GatingViolation> out;
  std::set<std::string> authorized;
  for (const auto& e : entries) {
    if (const auto* v = e.as<event::ValidationOutcome>(); v && v->authorized) authorized.insert(v->session);
    if (const auto* r = e.as<event::RoundStatus>(); r && r->status == kShareEmitted && !authorized.contains(r->session))
      out.push_back({e.participant_id, e.seq, r->session});
  }
  return out;
}

}  // namespace hotmpc::node
