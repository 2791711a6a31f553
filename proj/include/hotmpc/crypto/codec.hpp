#pragma once

#include <json.hpp>

#include "hotmpc/crypto/frost.hpp"
#include "hotmpc/crypto/keys.hpp"
#include "hotmpc/crypto/schnorr.hpp"

// JSON mapping for crypto values: every scalar and element is its canonical
// fixed-width encoding as lowercase hex.

namespace hotmpc::crypto {

using nlohmann::json;

template <GroupBackend G>
void to_json(json& j, const Scalar<G>& s) {
  j = s.hex();
}
template <GroupBackend G>
void from_json(const json& j, Scalar<G>& s) {
  auto bytes = from_hex(j.get<std::string>());
  if (!bytes) throw Error(Errc::InvalidEncoding, "scalar is not hex");
  s = Scalar<G>::decode_or_throw(*bytes);
}

template <GroupBackend G>
void to_json(json& j, const Element<G>& e) {
  j = e.hex();
}
template <GroupBackend G>
void from_json(const json& j, Element<G>& e) {
  auto bytes = from_hex(j.get<std::string>());
  if (!bytes) throw Error(Errc::InvalidEncoding, "element is not hex");
  e = Element<G>::decode_or_throw(*bytes);
}

template <GroupBackend G>
void to_json(json& j, const Signature<G>& s) {
  j = s.hex();
}
template <GroupBackend G>
void from_json(const json& j, Signature<G>& s) {
  auto bytes = from_hex(j.get<std::string>());
  auto sig = bytes ? Signature<G>::decode(*bytes) : std::nullopt;
  if (!sig) throw Error(Errc::InvalidEncoding, "malformed signature");
  s = *sig;
}

template <GroupBackend G>
json element_map_to_json(const std::map<ParticipantId, Element<G>>& m) {
  json out = json::object();
  for (const auto& [id, e] : m) out[std::to_string(id)] = e;
  return out;
}

template <GroupBackend G>
std::map<ParticipantId, Element<G>> element_map_from_json(const json& j) {
  std::map<ParticipantId, Element<G>> out;
  for (const auto& [k, v] : j.items()) out.emplace(static_cast<ParticipantId>(std::stoul(k)), v.template get<Element<G>>());
  return out;
}

template <GroupBackend G>
void to_json(json& j, const PublicKeyPackage<G>& p) {
  j = {{"group_public_key", p.group_public_key},
       {"threshold", p.threshold},
       {"verification_shares", element_map_to_json(p.verification_shares)}};
}
template <GroupBackend G>
void from_json(const json& j, PublicKeyPackage<G>& p) {
  p.group_public_key = j.at("group_public_key").template get<Element<G>>();
  p.threshold = j.at("threshold").get<unsigned>();
  p.verification_shares = element_map_from_json<G>(j.at("verification_shares"));
}

template <GroupBackend G>
void to_json(json& j, const KeyShare<G>& k) {
  j = {{"participant_id", k.participant_id},
       {"share", k.share},
       {"group_public_key", k.group_public_key},
       {"threshold", k.threshold},
       {"participant_set", k.participant_set},
       {"verification_shares", element_map_to_json(k.verification_shares)}};
}
template <GroupBackend G>
void from_json(const json& j, KeyShare<G>& k) {
  k.participant_id = j.at("participant_id").get<ParticipantId>();
  k.share = j.at("share").template get<Scalar<G>>();
  k.group_public_key = j.at("group_public_key").template get<Element<G>>();
  k.threshold = j.at("threshold").get<unsigned>();
  k.participant_set = j.at("participant_set").get<ParticipantList>();
  k.verification_shares = element_map_from_json<G>(j.at("verification_shares"));
}

template <GroupBackend G>
void to_json(json& j, const NonceCommitment<G>& c) {
  j = {{"participant_id", c.participant_id}, {"hiding", c.hiding}, {"binding", c.binding}};
}
template <GroupBackend G>
void from_json(const json& j, NonceCommitment<G>& c) {
  c.participant_id = j.at("participant_id").get<ParticipantId>();
  c.hiding = j.at("hiding").template get<Element<G>>();
  c.binding = j.at("binding").template get<Element<G>>();
}

template <GroupBackend G>
void to_json(json& j, const SignatureShare<G>& s) {
  j = {{"participant_id", s.participant_id}, {"z", s.z}};
}
template <GroupBackend G>
void from_json(const json& j, SignatureShare<G>& s) {
  s.participant_id = j.at("participant_id").get<ParticipantId>();
  s.z = j.at("z").template get<Scalar<G>>();
}

template <GroupBackend G>
void to_json(json& j, const VssCommitment<G>& c) {
  j = c.coefficients();
}
template <GroupBackend G>
void from_json(const json& j, VssCommitment<G>& c) {
  c = VssCommitment<G>(j.template get<std::vector<Element<G>>>());
}

}  // namespace hotmpc::crypto

namespace hotmpc {
inline void to_json(nlohmann::json& j, const KeyId& k) { j = k.hex(); }
inline void from_json(const nlohmann::json& j, KeyId& k) { k = KeyId::from_hex(j.get<std::string>()); }
}  // namespace hotmpc
