#pragma once

#include "hotmpc/crypto/keys.hpp"
#include "hotmpc/crypto/schnorr.hpp"

// Non-hardened child keys addressed by key_id:
//   tweak    = H_tweak(root_pk || key_id)
//   child_pk = root_pk + tweak * G
// Every share is shifted by the same tweak, so the shared secret shifts by the
// tweak too (Lagrange weights sum to one). Public derivation needs no secrets.

namespace hotmpc::crypto {

template <GroupBackend G>
Scalar<G> derive_tweak(const KeyId& key_id, const Element<G>& root_public_key) {
  return hash_to_scalar<G>(kTweakTag, ByteWriter().raw(root_public_key.encode()).raw(key_id.bytes()).bytes());
}

// Raw-byte entry point; rejects identifiers that are not exactly 32 bytes.
template <GroupBackend G>
Scalar<G> derive_tweak(ByteView key_id, const Element<G>& root_public_key) {
  return derive_tweak(KeyId::from_bytes(key_id), root_public_key);
}

template <GroupBackend G>
Element<G> derive_child_public(const Element<G>& root_public_key, const Scalar<G>& tweak) {
  return root_public_key + Element<G>::base_mul(tweak);
}

template <GroupBackend G>
Element<G> derive_child_public(const Element<G>& root_public_key, const KeyId& key_id) {
  return derive_child_public(root_public_key, derive_tweak(key_id, root_public_key));
}

template <GroupBackend G>
PublicKeyPackage<G> derive_child_package(const PublicKeyPackage<G>& root, const Scalar<G>& tweak) {
  PublicKeyPackage<G> out = root;
  const auto shift = Element<G>::base_mul(tweak);
  out.group_public_key = root.group_public_key + shift;
  for (auto& [id, y] : out.verification_shares) y = y + shift;
  return out;
}

template <GroupBackend G>
PublicKeyPackage<G> derive_child_package(const PublicKeyPackage<G>& root, const KeyId& key_id) {
  return derive_child_package(root, derive_tweak(key_id, root.group_public_key));
}

template <GroupBackend G>
KeyShare<G> apply_tweak_to_share(const KeyShare<G>& share, const Scalar<G>& tweak) {
  KeyShare<G> out = share;
  out.share = share.share + tweak;
  auto pkg = derive_child_package(share.public_package(), tweak);
  out.group_public_key = pkg.group_public_key;
  out.verification_shares = std::move(pkg.verification_shares);
  return out;
}

template <GroupBackend G>
KeyShare<G> apply_tweak_to_share(const KeyShare<G>& share, const KeyId& key_id) {
  return apply_tweak_to_share(share, derive_tweak(key_id, share.group_public_key));
}

}  // namespace hotmpc::crypto
