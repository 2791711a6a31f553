#pragma once

#include <json.hpp>

#include "hotmpc/common/types.hpp"
#include "hotmpc/crypto/crypto.hpp"

namespace hotmpc::chainstate {

// Simulated enclave quote: the enclave identity key signs the code identity
// hash and the time of measurement.
struct AttestationStatement {
  ParticipantId participant_id = 0;
  Digest32 code_hash{};
  SimTime timestamp = 0;
  Signature signature;

  Bytes signing_bytes() const {
    return ByteWriter().str("HOTMPC-v1/attestation").u32(participant_id).raw(code_hash).u64(timestamp).bytes();
  }

  static AttestationStatement make(ParticipantId id, const Digest32& code_hash, SimTime now, const KeyPair& enclave) {
    AttestationStatement st{id, code_hash, now, {}};
    st.signature = enclave.sign(st.signing_bytes());
    return st;
  }
};

// Identity hash of the node software; the controller pins this value.
inline Digest32 default_code_hash() { return sha256(std::string_view("hotmpc-node/1.0.0")); }

inline void to_json(nlohmann::json& j, const AttestationStatement& a) {
  j = {{"participant_id", a.participant_id},
       {"code_hash", to_hex(a.code_hash)},
       {"timestamp", a.timestamp},
       {"signature", a.signature}};
}
inline void from_json(const nlohmann::json& j, AttestationStatement& a) {
  a.participant_id = j.at("participant_id").get<ParticipantId>();
  auto h = array_from_hex<32>(j.at("code_hash").get<std::string>());
  if (!h) throw Error(Errc::InvalidEncoding, "code_hash");
  a.code_hash = *h;
  a.timestamp = j.at("timestamp").get<SimTime>();
  a.signature = j.at("signature").get<Signature>();
}

}  // namespace hotmpc::chainstate
