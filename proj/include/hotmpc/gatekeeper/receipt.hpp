#pragma once

#include <json.hpp>
#include <string>

#include "hotmpc/common/types.hpp"
#include "hotmpc/crypto/crypto.hpp"

namespace hotmpc::gatekeeper {

struct SignRequest {
  KeyId key_id;
  Digest32 message{};  // signing payload
  Bytes metadata;
  std::string target_chain;
  std::string scheme{kSchemeSchnorr};
  friend bool operator==(const SignRequest&, const SignRequest&) = default;

  Bytes encode() const {
    return ByteWriter().raw(key_id.bytes()).raw(message).var(metadata).str(target_chain).str(scheme).bytes();
  }
  std::string message_hex() const { return to_hex(message); }
};

inline void check_request(const SignRequest& r) {
  if (r.scheme == kSchemeEcdsa) throw Error(Errc::MalformedRequest, "scheme " + r.scheme + " is reserved");
  if (r.scheme != kSchemeSchnorr) throw Error(Errc::MalformedRequest, "unknown scheme " + r.scheme);
  if (r.target_chain.empty()) throw Error(Errc::MalformedRequest, "target_chain missing");
  if (r.metadata.size() > 4096) throw Error(Errc::MalformedRequest, "metadata too large");
}

// Co-signed admission ticket. The signature covers (gatekeeper_id, request,
// deadline) plus the issuance time and a per-gatekeeper serial, so that equal
// requests yield distinct receipts and quota windows can be audited.
struct Receipt {
  std::string gatekeeper_id;
  std::uint64_t serial = 0;
  SignRequest request;
  SimTime issued_at = 0;
  SimTime deadline = 0;
  Signature signature;
  friend bool operator==(const Receipt&, const Receipt&) = default;

  Bytes signing_bytes() const {
    return ByteWriter()
        .str("HOTMPC-v1/receipt")
        .str(gatekeeper_id)
        .u64(serial)
        .var(request.encode())
        .u64(issued_at)
        .u64(deadline)
        .bytes();
  }

  Digest32 hash() const {
    auto sig = signature.encode();
    return sha256(ByteWriter().var(signing_bytes()).raw(sig).bytes());
  }

  bool verify(const PublicKey& gatekeeper_key) const {
    return deadline > issued_at && crypto::verify(signing_bytes(), signature, gatekeeper_key);
  }

  static Receipt issue(const std::string& gatekeeper_id, std::uint64_t serial, SignRequest request, SimTime now,
                       SimTime ttl, const KeyPair& key) {
    Receipt r{gatekeeper_id, serial, std::move(request), now, now + ttl, {}};
    r.signature = key.sign(r.signing_bytes());
    return r;
  }
};

inline void to_json(nlohmann::json& j, const SignRequest& r) {
  j = {{"key_id", r.key_id},
       {"message", to_hex(r.message)},
       {"metadata", to_hex(r.metadata)},
       {"target_chain", r.target_chain},
       {"scheme", r.scheme}};
}
inline void from_json(const nlohmann::json& j, SignRequest& r) {
  r.key_id = j.at("key_id").get<KeyId>();
  auto m = array_from_hex<32>(j.at("message").get<std::string>());
  auto md = from_hex(j.at("metadata").get<std::string>());
  if (!m || !md) throw Error(Errc::MalformedRequest, "message must be 32 bytes of hex, metadata hex");
  r.message = *m;
  r.metadata = *md;
  r.target_chain = j.at("target_chain");
  r.scheme = j.at("scheme");
}

inline void to_json(nlohmann::json& j, const Receipt& r) {
  j = {{"gatekeeper_id", r.gatekeeper_id}, {"serial", r.serial},     {"request", r.request},
       {"issued_at", r.issued_at},         {"deadline", r.deadline}, {"signature", r.signature}};
}
inline void from_json(const nlohmann::json& j, Receipt& r) {
  r.gatekeeper_id = j.at("gatekeeper_id");
  r.serial = j.at("serial");
  r.request = j.at("request").get<SignRequest>();
  r.issued_at = j.at("issued_at");
  r.deadline = j.at("deadline");
  r.signature = j.at("signature").get<Signature>();
}

}  // namespace hotmpc::gatekeeper
