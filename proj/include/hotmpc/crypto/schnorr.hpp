#pragma once

#include <optional>
#include <string_view>

#include "hotmpc/crypto/group.hpp"

namespace hotmpc::crypto {

// Domain-separation tags. Each hash-to-scalar use has its own constant.
inline constexpr std::string_view kChallengeTag = "HOTMPC-v1/challenge";
inline constexpr std::string_view kBindingTag = "HOTMPC-v1/binding";
inline constexpr std::string_view kTweakTag = "HOTMPC-v1/tweak";
inline constexpr std::string_view kNonceTag = "HOTMPC-v1/nonce";

// SHA-512 over a tagged, length-prefixed input, reduced mod q.
template <GroupBackend G>
Scalar<G> hash_to_scalar(std::string_view tag, ByteView body) {
  return Scalar<G>::from_wide(sha512(ByteWriter().str(tag).raw(body).bytes()));
}

template <GroupBackend G>
struct Signature {
  static constexpr std::size_t kBytes = G::kElementBytes + G::kScalarBytes;

  Element<G> R;
  Scalar<G> z;

  // R || z, fixed width.
  ByteArray<kBytes> encode() const {
    ByteArray<kBytes> out{};
    auto r = R.encode();
    auto s = z.encode();
    std::copy(r.begin(), r.end(), out.begin());
    std::copy(s.begin(), s.end(), out.begin() + G::kElementBytes);
    return out;
  }
  std::string hex() const { return to_hex(encode()); }

  static std::optional<Signature> decode(ByteView bytes) {
    if (bytes.size() != kBytes) return std::nullopt;
    auto R = Element<G>::decode(bytes.first(G::kElementBytes));
    auto z = Scalar<G>::decode(bytes.subspan(G::kElementBytes));
    if (!R || !z) return std::nullopt;
    return Signature{*R, *z};
  }

  friend bool operator==(const Signature& a, const Signature& b) { return a.encode() == b.encode(); }
};

// c = H(R || PK || message)
template <GroupBackend G>
Scalar<G> challenge(const Element<G>& R, const Element<G>& public_key, ByteView message) {
  return hash_to_scalar<G>(kChallengeTag, ByteWriter().raw(R.encode()).raw(public_key.encode()).var(message).bytes());
}

// Plain single-key verifier: z*G == R + c*PK.
template <GroupBackend G>
bool verify(ByteView message, const Signature<G>& sig, const Element<G>& public_key) {
  auto c = challenge(sig.R, public_key, message);
  return Element<G>::base_mul(sig.z) == sig.R + public_key * c;
}

template <GroupBackend G>
bool verify(ByteView message, ByteView encoded_sig, const Element<G>& public_key) {
  auto sig = Signature<G>::decode(encoded_sig);
  return sig && verify(message, *sig, public_key);
}

// Single-party keypair; used for enclave identities, gatekeeper receipts and
// passkey-style authorization keys.
template <GroupBackend G>
struct SchnorrKeyPair {
  Scalar<G> secret;
  Element<G> public_key;

  static SchnorrKeyPair from_secret(const Scalar<G>& s) { return {s, Element<G>::base_mul(s)}; }
  static SchnorrKeyPair generate(Drbg& rng) { return from_secret(Scalar<G>::random(rng)); }

  // Deterministic nonce r = H(secret || message); never zero in practice.
  Signature<G> sign(ByteView message) const {
    auto r = hash_to_scalar<G>(kNonceTag, ByteWriter().raw(secret.encode()).var(message).bytes());
    auto R = Element<G>::base_mul(r);
    return {R, r + challenge(R, public_key, message) * secret};
  }
};

}  // namespace hotmpc::crypto
