#pragma once

#include <array>
#include <json.hpp>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "hotmpc/crypto/crypto.hpp"

// Key-owner authorization policies. hot_verify is const and must not touch
// policy state; registration is the only mutating entry point.
//
// The message argument is the lowercase hex encoding of the 32-byte signing
// payload. Signature-based policies expect signatures over those hex
// characters, taken as bytes.

namespace hotmpc::chainsim {

class Policy {
 public:
  virtual ~Policy() = default;
  virtual std::string name() const = 0;
  virtual bool hot_verify(const std::string& message, const KeyId& key_id, ByteView metadata) const = 0;
  virtual nlohmann::json state() const { return nlohmann::json::object(); }
  virtual void register_key(const KeyId&, const std::vector<PublicKey>&) {
    throw Error(Errc::MalformedRequest, "policy " + name() + " has no key registration");
  }
  virtual std::unique_ptr<Policy> clone() const = 0;

  Digest32 state_hash() const { return sha256(ByteWriter().str(name()).str(state().dump()).bytes()); }
};

// Passkey wallet: one public key per key_id; metadata is a signature over the
// message under that key.
class PasskeyPolicy final : public Policy {
 public:
  std::string name() const override { return "passkey"; }

  bool hot_verify(const std::string& message, const KeyId& key_id, ByteView metadata) const override {
    auto it = passkeys_.find(key_id);
    if (it == passkeys_.end()) return false;
    return crypto::verify(as_bytes(message), metadata, it->second);
  }

  void register_key(const KeyId& key_id, const std::vector<PublicKey>& keys) override {
    if (keys.size() != 1) throw Error(Errc::MalformedRequest, "passkey takes exactly one public key");
    if (passkeys_.contains(key_id)) throw Error(Errc::AlreadyBound, key_id.hex());
    passkeys_.emplace(key_id, keys.front());
  }

  nlohmann::json state() const override {
    nlohmann::json bindings = nlohmann::json::object();
    for (const auto& [k, pk] : passkeys_) bindings[k.hex()] = pk;
    return {{"scheme", kSchemeSchnorr}, {"passkeys", bindings}};
  }

  static std::unique_ptr<PasskeyPolicy> from_state(const nlohmann::json& j) {
    auto p = std::make_unique<PasskeyPolicy>();
    if (j.contains("passkeys"))
      for (const auto& [k, v] : j.at("passkeys").items()) p->passkeys_.emplace(KeyId::from_hex(k), v.get<PublicKey>());
    return p;
  }

  std::unique_ptr<Policy> clone() const override { return std::make_unique<PasskeyPolicy>(*this); }

 private:
  std::map<KeyId, PublicKey> passkeys_;
};

// Two-factor: two keys per key_id, metadata is sig1 || sig2 over the message.
class TwoFactorPolicy final : public Policy {
 public:
  std::string name() const override { return "threshold-2fa"; }

  bool hot_verify(const std::string& message, const KeyId& key_id, ByteView metadata) const override {
    auto it = keys_.find(key_id);
    if (it == keys_.end() || metadata.size() != 2 * Signature::kBytes) return false;
    return crypto::verify(as_bytes(message), metadata.subspan(0, Signature::kBytes), it->second[0]) &&
           crypto::verify(as_bytes(message), metadata.subspan(Signature::kBytes), it->second[1]);
  }

  void register_key(const KeyId& key_id, const std::vector<PublicKey>& keys) override {
    if (keys.size() != 2) throw Error(Errc::MalformedRequest, "threshold-2fa takes exactly two public keys");
    if (keys[0] == keys[1]) throw Error(Errc::MalformedRequest, "the two factors must differ");
    if (keys_.contains(key_id)) throw Error(Errc::AlreadyBound, key_id.hex());
    keys_.emplace(key_id, std::array<PublicKey, 2>{keys[0], keys[1]});
  }

  nlohmann::json state() const override {
    nlohmann::json bindings = nlohmann::json::object();
    for (const auto& [k, pks] : keys_) bindings[k.hex()] = {pks[0], pks[1]};
    return {{"scheme", kSchemeSchnorr}, {"factors", bindings}};
  }

  static std::unique_ptr<TwoFactorPolicy> from_state(const nlohmann::json& j) {
    auto p = std::make_unique<TwoFactorPolicy>();
    if (j.contains("factors"))
      for (const auto& [k, v] : j.at("factors").items())
        p->keys_.emplace(KeyId::from_hex(k), std::array<PublicKey, 2>{v.at(0).get<PublicKey>(), v.at(1).get<PublicKey>()});
    return p;
  }

  std::unique_ptr<Policy> clone() const override { return std::make_unique<TwoFactorPolicy>(*this); }

 private:
  std::map<KeyId, std::array<PublicKey, 2>> keys_;
};

class ConstantPolicy final : public Policy {
 public:
  explicit ConstantPolicy(bool value) : value_(value) {}
  std::string name() const override { return value_ ? "always-true" : "always-false"; }
  bool hot_verify(const std::string&, const KeyId&, ByteView) const override { return value_; }
  std::unique_ptr<Policy> clone() const override { return std::make_unique<ConstantPolicy>(*this); }

 private:
  bool value_;
};

// Accepts when the first byte of SHA-256(message) is even. Stateless coin
// flip used to fuzz authorization gating.
class ParityPolicy final : public Policy {
 public:
  std::string name() const override { return "parity"; }
  bool hot_verify(const std::string& message, const KeyId&, ByteView) const override {
    return (sha256(message)[0] & 1) == 0;
  }
  std::unique_ptr<Policy> clone() const override { return std::make_unique<ParityPolicy>(*this); }
};

// Misbehaving contract: aborts on every call.
class PanicPolicy final : public Policy {
 public:
  std::string name() const override { return "panic"; }
  bool hot_verify(const std::string&, const KeyId&, ByteView) const override {
    throw std::runtime_error("contract trapped");
  }
  std::unique_ptr<Policy> clone() const override { return std::make_unique<PanicPolicy>(*this); }
};

struct PolicyInfo {
  std::string name;
  std::string description;
};

inline const std::vector<PolicyInfo>& policy_catalog() {
  static const std::vector<PolicyInfo> catalog{
      {"passkey", "one registered public key per key_id; metadata is a signature over the message"},
      {"always-true", "authorizes every message"},
      {"always-false", "authorizes nothing"},
      {"threshold-2fa", "two registered keys per key_id; metadata is two concatenated signatures"},
      {"parity", "authorizes when SHA-256(message) starts with an even byte"},
      {"panic", "traps on every call"},
  };
  return catalog;
}

inline std::unique_ptr<Policy> make_policy(const std::string& name, const nlohmann::json& state = {}) {
  if (name == "passkey") return PasskeyPolicy::from_state(state.is_null() ? nlohmann::json::object() : state);
  if (name == "threshold-2fa") return TwoFactorPolicy::from_state(state.is_null() ? nlohmann::json::object() : state);
  if (name == "always-true") return std::make_unique<ConstantPolicy>(true);
  if (name == "always-false") return std::make_unique<ConstantPolicy>(false);
  if (name == "parity") return std::make_unique<ParityPolicy>();
  if (name == "panic") return std::make_unique<PanicPolicy>();
  throw Error(Errc::ConfigError, "unknown policy " + name);
}

}  // namespace hotmpc::chainsim
