#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "hotmpc/netharness/scenario.hpp"

// Bundled threat scenarios. The JSON here is the canonical copy; the files
// under scenarios/ are exported from it (`hotmpc scenario export`).

namespace hotmpc::netharness {

struct LibraryEntry {
  std::string_view name;
  std::string_view json;
};

namespace library_text {

// Deploys a passkey wallet contract, reserves a key for it and binds alice.
#define HOTMPC_WALLET_PRELUDE                                              \
  R"({"op": "deploy", "chain": "near", "policy": "passkey", "as": "wallet"},)" \
  R"({"op": "reserve", "chain": "near", "contract": "$wallet", "as": "key"},)" \
  R"({"op": "register-owners", "key": "$key", "owners": ["alice"]})"

inline constexpr std::string_view happy_path = R"({
  "name": "happy-path",
  "description": "Authorized request signed end to end; forged authorization refused; one reward epoch.",
  "world": {"seed": 7, "nodes": 5, "threshold": 3},
  "steps": [)" HOTMPC_WALLET_PRELUDE R"(,
    {"op": "sign", "gatekeeper": "gk-1", "key": "$key", "message": "send 1 BTC to bob", "metadata": "passkey:alice", "expect": "ok"},
    {"op": "sign", "gatekeeper": "gk-1", "key": "$key", "message": "send 9 BTC to mallory", "metadata": "forged", "expect": "Unauthorized"},
    {"op": "epoch"}
  ],
  "assertions": [
    {"kind": "signatures", "equals": 1},
    {"kind": "signatures-verified"},
    {"kind": "flow-steps", "steps": [1, 2, 3, 4, 5, 6]},
    {"kind": "gating-audit-clean"},
    {"kind": "logs-verify"},
    {"kind": "causality"},
    {"kind": "conservation"},
    {"kind": "mint-exact"}
  ]
})";

inline constexpr std::string_view uncooperative_node = R"({
  "name": "uncooperative-node",
  "description": "Two of five nodes stall; the gatekeeper reselects responsive signers and blacklists the stallers.",
  "world": {"seed": 11, "nodes": 5, "threshold": 3, "behaviors": {"1": "stall", "2": "stall"}},
  "steps": [)" HOTMPC_WALLET_PRELUDE R"(,
    {"op": "sign", "key": "$key", "message": "first", "metadata": "passkey:alice", "expect": "ok"},
    {"op": "sign", "key": "$key", "message": "second", "metadata": "passkey:alice", "expect": "ok"},
    {"op": "health-check", "gatekeeper": "gk-1"}
  ],
  "assertions": [
    {"kind": "signatures", "equals": 2},
    {"kind": "signatures-verified"},
    {"kind": "blacklisted", "gatekeeper": "gk-1", "nodes": [1, 2]},
    {"kind": "reported-unavailable", "node": 1, "at_least": 1},
    {"kind": "reported-unavailable", "node": 2, "at_least": 1},
    {"kind": "gating-audit-clean"},
    {"kind": "conservation"}
  ]
})";

inline constexpr std::string_view sub_threshold = R"({
  "name": "sub-threshold",
  "description": "Three of five nodes stall, leaving threshold minus one responsive nodes; signing is unavailable.",
  "world": {"seed": 13, "nodes": 5, "threshold": 3, "behaviors": {"1": "stall", "2": "stall", "3": "stall"}},
  "steps": [)" HOTMPC_WALLET_PRELUDE R"(,
    {"op": "sign", "key": "$key", "message": "cannot happen", "metadata": "passkey:alice", "expect": "ThresholdUnavailable"}
  ],
  "assertions": [
    {"kind": "signatures", "equals": 0},
    {"kind": "last-exit-code", "equals": 3},
    {"kind": "gating-audit-clean"},
    {"kind": "conservation"}
  ],
  "exit_with_last_outcome": true
})";

inline constexpr std::string_view quota_abuse = R"({
  "name": "quota-abuse",
  "description": "A gatekeeper ignores its lease; nodes enforce the limit, a fisherman proves the excess with receipts and the gatekeeper is slashed and removed.",
  "world": {"seed": 17, "nodes": 5, "threshold": 3, "gatekeepers": [
    {"id": "gk-1", "capacity": 10},
    {"id": "gk-2", "capacity": 1, "behavior": "ignore-quota"}]},
  "steps": [)" HOTMPC_WALLET_PRELUDE R"(,
    {"op": "sign", "gatekeeper": "gk-2", "key": "$key", "message": "within lease", "metadata": "passkey:alice", "expect": "ok"},
    {"op": "sign", "gatekeeper": "gk-2", "key": "$key", "message": "beyond lease", "metadata": "passkey:alice", "expect": "QuotaViolation"},
    {"op": "dispute", "fisherman": "fish", "accused": "gk-2", "predicate": "receipt-beyond-quota", "evidence": "receipts", "expect": "upheld"},
    {"op": "sign", "gatekeeper": "gk-2", "key": "$key", "message": "after removal", "metadata": "passkey:alice", "expect": "UnknownGatekeeper"},
    {"op": "sign", "gatekeeper": "gk-1", "key": "$key", "message": "honest gatekeeper", "metadata": "passkey:alice", "expect": "ok"}
  ],
  "assertions": [
    {"kind": "dispute", "id": 1, "verdict": "upheld"},
    {"kind": "stake", "account": "gk-2", "equals": 270},
    {"kind": "balance", "account": "fish", "equals": 1015},
    {"kind": "gatekeeper-active", "gatekeeper": "gk-2", "equals": false},
    {"kind": "signatures", "equals": 2},
    {"kind": "slash-split-exact"},
    {"kind": "gating-audit-clean"},
    {"kind": "conservation"}
  ]
})";

inline constexpr std::string_view gatekeeper_downtime = R"({
  "name": "gatekeeper-downtime",
  "description": "The chosen gatekeeper is down; the user switches to another one.",
  "world": {"seed": 19, "nodes": 5, "threshold": 3, "gatekeepers": [{"id": "gk-1"}, {"id": "gk-2"}]},
  "steps": [)" HOTMPC_WALLET_PRELUDE R"(,
    {"op": "fault", "target": "gk-1", "fault": "offline"},
    {"op": "sign", "gatekeeper": "gk-1", "key": "$key", "message": "during outage", "metadata": "passkey:alice", "expect": "ok"},
    {"op": "heal", "target": "gk-1"},
    {"op": "sign", "gatekeeper": "gk-1", "key": "$key", "message": "after recovery", "metadata": "passkey:alice", "expect": "ok"}
  ],
  "assertions": [
    {"kind": "failovers", "equals": 1},
    {"kind": "signatures", "equals": 2},
    {"kind": "signatures-verified"},
    {"kind": "conservation"}
  ]
})";

inline constexpr std::string_view stale_attestation = R"({
  "name": "stale-attestation",
  "description": "A node stops re-attesting; it drops out of the eligible set and receives no protocol rounds. Mimicked enclaves and patched code are rejected.",
  "world": {"seed": 23, "nodes": 5, "threshold": 3, "behaviors": {"4": "stale-attestation"}},
  "steps": [)" HOTMPC_WALLET_PRELUDE R"(,
    {"op": "advance", "dt": 120},
    {"op": "sign", "key": "$key", "message": "after expiry", "metadata": "passkey:alice", "repeat": 3, "expect": "ok"},
    {"op": "hijack", "target": "enclave-mimic", "node": 4, "expect": "BadSignature"},
    {"op": "hijack", "target": "code-identity", "node": 4, "expect": "CodeIdentityMismatch"},
    {"op": "direct-access", "node": 4, "key": "$key", "expect": "UnknownGatekeeper"}
  ],
  "assertions": [
    {"kind": "eligible", "node": 4, "equals": false},
    {"kind": "no-rounds-after-expiry", "node": 4},
    {"kind": "signatures", "equals": 3},
    {"kind": "signatures-verified"},
    {"kind": "no-direct-access"},
    {"kind": "conservation"}
  ]
})";

inline constexpr std::string_view tampered_log = R"({
  "name": "tampered-log",
  "description": "A fisherman alters a signed log entry to frame an honest node; the evidence is rejected and the fee forfeited.",
  "world": {"seed": 29, "nodes": 4, "threshold": 3},
  "steps": [)" HOTMPC_WALLET_PRELUDE R"(,
    {"op": "sign", "key": "$key", "message": "payment", "metadata": "passkey:alice", "repeat": 2, "expect": "ok"},
    {"op": "dispute", "fisherman": "fish", "accused": "node-2", "predicate": "signing-without-validation", "evidence": "tampered-log", "expect": "invalid-evidence"},
    {"op": "dispute", "fisherman": "fish", "accused": "node-2", "predicate": "signing-without-validation", "evidence": "log", "expect": "dismissed"}
  ],
  "assertions": [
    {"kind": "dispute", "id": 1, "verdict": "invalid-evidence"},
    {"kind": "dispute", "id": 2, "verdict": "dismissed"},
    {"kind": "stake", "account": "node-2", "equals": 200},
    {"kind": "balance", "account": "fish", "equals": 980},
    {"kind": "logs-verify"},
    {"kind": "conservation"}
  ]
})";

inline constexpr std::string_view key_leakage = R"({
  "name": "key-leakage",
  "description": "A coalition below the threshold learns nothing from its shares; after resharing, the excluded node holds no share and old shares do not combine with new ones.",
  "world": {"seed": 31, "nodes": 5, "threshold": 3},
  "steps": [)" HOTMPC_WALLET_PRELUDE R"(,
    {"op": "sign", "key": "$key", "message": "before", "metadata": "passkey:alice", "expect": "ok"},
    {"op": "snapshot-shares", "as": "old"},
    {"op": "reshare", "participants": [1, 2, 3, 4], "threshold": 3, "expect": "ok"},
    {"op": "sign", "key": "$key", "message": "after", "metadata": "passkey:alice", "expect": "ok"}
  ],
  "assertions": [
    {"kind": "coalition-reconstructs", "snapshot": "old", "nodes": [1, 2], "equals": false},
    {"kind": "coalition-reconstructs", "snapshot": "old", "nodes": [1, 2, 3], "equals": true},
    {"kind": "coalition-reconstructs", "snapshot": "old", "nodes": [1, 2], "current_nodes": [3], "equals": false},
    {"kind": "coalition-reconstructs", "nodes": [2, 3, 4], "equals": true},
    {"kind": "share-erased", "node": 5},
    {"kind": "group-key-unchanged"},
    {"kind": "epoch", "equals": 1},
    {"kind": "signatures", "equals": 2},
    {"kind": "signatures-verified"}
  ]
})";

inline constexpr std::string_view registry_hijack = R"({
  "name": "registry-hijack",
  "description": "Attempts to rebind a key owner, replace the root key, or reconfigure the network from outside all fail.",
  "world": {"seed": 37, "nodes": 5, "threshold": 3},
  "steps": [)" HOTMPC_WALLET_PRELUDE R"(,
    {"op": "hijack", "target": "rebind-owner", "key": "$key", "owner": "mallory", "expect": "AlreadyBound"},
    {"op": "hijack", "target": "root-key", "expect": "MixedPublicKeys"},
    {"op": "hijack", "target": "outsider-proposal", "proposer": 99, "expect": "NotParticipant"},
    {"op": "sign", "key": "$key", "message": "drain wallet", "metadata": "passkey:mallory", "expect": "Unauthorized"},
    {"op": "sign", "key": "$key", "message": "owner payment", "metadata": "passkey:alice", "expect": "ok"}
  ],
  "assertions": [
    {"kind": "signatures", "equals": 1},
    {"kind": "signatures-verified"},
    {"kind": "group-key-unchanged"},
    {"kind": "epoch", "equals": 0},
    {"kind": "gating-audit-clean"}
  ]
})";

inline constexpr std::string_view partition_heal = R"({
  "name": "partition-heal",
  "description": "Three of five nodes are partitioned away, so signing is unavailable; after healing the next request succeeds.",
  "world": {"seed": 41, "nodes": 5, "threshold": 3},
  "steps": [)" HOTMPC_WALLET_PRELUDE R"(,
    {"op": "fault", "targets": ["node-1", "node-2", "node-3"], "fault": "partition"},
    {"op": "sign", "key": "$key", "message": "during partition", "metadata": "passkey:alice", "expect": "ThresholdUnavailable"},
    {"op": "heal", "target": "all"},
    {"op": "sign", "key": "$key", "message": "after heal", "metadata": "passkey:alice", "expect": "ok"}
  ],
  "assertions": [
    {"kind": "signatures", "equals": 1},
    {"kind": "signatures-verified"},
    {"kind": "causality"},
    {"kind": "conservation"}
  ]
})";

inline constexpr std::string_view exclusion_reshare = R"({
  "name": "exclusion-reshare",
  "description": "A permanently stalled node is voted out and the key is reshared among the rest without changing the public key.",
  "world": {"seed": 43, "nodes": 5, "threshold": 3, "behaviors": {"5": "stall"}},
  "steps": [)" HOTMPC_WALLET_PRELUDE R"(,
    {"op": "sign", "key": "$key", "message": "before", "metadata": "passkey:alice", "expect": "ok"},
    {"op": "reshare", "participants": [1, 2, 3, 4], "threshold": 3, "expect": "ok"},
    {"op": "sign", "key": "$key", "message": "after", "metadata": "passkey:alice", "expect": "ok"},
    {"op": "epoch"}
  ],
  "assertions": [
    {"kind": "epoch", "equals": 1},
    {"kind": "participants", "equals": [1, 2, 3, 4]},
    {"kind": "group-key-unchanged"},
    {"kind": "signatures", "equals": 2},
    {"kind": "signatures-verified"},
    {"kind": "conservation"},
    {"kind": "mint-exact"}
  ]
})";

#undef HOTMPC_WALLET_PRELUDE

}  // namespace library_text

inline const std::vector<LibraryEntry>& scenario_library() {
  static const std::vector<LibraryEntry> lib{
      {"happy-path", library_text::happy_path},
      {"uncooperative-node", library_text::uncooperative_node},
      {"sub-threshold", library_text::sub_threshold},
      {"quota-abuse", library_text::quota_abuse},
      {"gatekeeper-downtime", library_text::gatekeeper_downtime},
      {"stale-attestation", library_text::stale_attestation},
      {"tampered-log", library_text::tampered_log},
      {"key-leakage", library_text::key_leakage},
      {"registry-hijack", library_text::registry_hijack},
      {"partition-heal", library_text::partition_heal},
      {"exclusion-reshare", library_text::exclusion_reshare},
  };
  return lib;
}

inline Scenario library_scenario(std::string_view name) {
  for (const auto& e : scenario_library())
    if (e.name == name) return Scenario::parse_text(std::string(e.json));
  throw Error(Errc::UnknownTarget, "no bundled scenario named " + std::string(name));
}

}  // namespace hotmpc::netharness
