#pragma once

#include <json.hpp>
#include <map>
#include <string>

#include "hotmpc/common/bytes.hpp"
#include "hotmpc/crypto/codec.hpp"

namespace hotmpc::chainstate {

// key_id -> authorizing contract. A binding is written once and never
// changed; the interface has no update or delete operation.
struct RegistryEntry {
  KeyId key_id;
  std::string chain_id;
  std::string contract_address;
  friend bool operator==(const RegistryEntry&, const RegistryEntry&) = default;
};

class KeyRegistry {
 public:
  // key_id = SHA-256(tag || chain_id || contract_address || counter); the
  // global counter makes repeated reservations for one contract distinct.
  KeyId reserve_key(const std::string& chain_id, const std::string& contract_address) {
    if (chain_id.empty() || contract_address.empty())
      throw Error(Errc::MalformedRequest, "chain_id and contract_address must be non-empty");
    KeyId id(sha256(
        ByteWriter().str("HOTMPC-v1/key-id").str(chain_id).str(contract_address).u64(counter_).bytes()));
    ++counter_;
    entries_.emplace(id, RegistryEntry{id, chain_id, contract_address});
    return id;
  }

  const RegistryEntry& lookup_authorizer(const KeyId& key_id) const {
    auto it = entries_.find(key_id);
    if (it == entries_.end()) throw Error(Errc::UnknownKeyId, key_id.hex());
    return it->second;
  }

  bool contains(const KeyId& key_id) const { return entries_.contains(key_id); }
  const std::map<KeyId, RegistryEntry>& entries() const { return entries_; }
  std::uint64_t reservations() const { return counter_; }

  Digest32 state_hash() const { return sha256(to_json().dump()); }

  nlohmann::json to_json() const {
    nlohmann::json entries = nlohmann::json::array();
    for (const auto& [id, e] : entries_)
      entries.push_back({{"key_id", id}, {"chain_id", e.chain_id}, {"contract_address", e.contract_address}});
    return {{"counter", counter_}, {"entries", entries}};
  }

  static KeyRegistry from_json(const nlohmann::json& j) {
    KeyRegistry r;
    r.counter_ = j.at("counter").get<std::uint64_t>();
    for (const auto& e : j.at("entries")) {
      auto id = e.at("key_id").get<KeyId>();
      r.entries_.emplace(id, RegistryEntry{id, e.at("chain_id"), e.at("contract_address")});
    }
    return r;
  }

 private:
  std::map<KeyId, RegistryEntry> entries_;
  std::uint64_t counter_ = 0;
};

}  // namespace hotmpc::chainstate
