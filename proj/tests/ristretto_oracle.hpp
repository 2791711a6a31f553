#pragma once

// Reference arithmetic for ristretto255 written directly against libsodium,
// plus hand-built hash transcripts. Used to check the library's signing,
// aggregation and derivation without going through its own code paths.
//
// Transcript layouts (u64/u32 big-endian, var(x) = u64 length || x):
//   hash_to_scalar(tag, body) = reduce(SHA-512(var(tag) || body))
//   challenge = hash_to_scalar("HOTMPC-v1/challenge", R || PK || var(msg))
//   binding_i = hash_to_scalar("HOTMPC-v1/binding", u32 i || var(msg) || var(list))
//     list = u32 count || (u32 id || D_id || E_id)* in ascending id order
//   tweak     = hash_to_scalar("HOTMPC-v1/tweak", root_pk || key_id)

#include <sodium.h>

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace roracle {

using Sc = std::array<unsigned char, 32>;
using Pt = std::array<unsigned char, 32>;
using Buf = std::vector<unsigned char>;

inline void put_u64(Buf& b, std::uint64_t v) {
  for (int s = 56; s >= 0; s -= 8) b.push_back(static_cast<unsigned char>(v >> s));
}
inline void put_u32(Buf& b, std::uint32_t v) {
  for (int s = 24; s >= 0; s -= 8) b.push_back(static_cast<unsigned char>(v >> s));
}
template <class C>
void put_raw(Buf& b, const C& c) {
  b.insert(b.end(), c.begin(), c.end());
}
template <class C>
void put_var(Buf& b, const C& c) {
  put_u64(b, c.size());
  put_raw(b, c);
}

inline Sc h2s(std::string_view tag, const Buf& body) {
  Buf in;
  put_var(in, tag);
  put_raw(in, body);
  unsigned char wide[64];
  crypto_hash_sha512(wide, in.data(), in.size());
  Sc out;
  crypto_core_ristretto255_scalar_reduce(out.data(), wide);
  return out;
}

inline Sc add(const Sc& a, const Sc& b) {
  Sc o;
  crypto_core_ristretto255_scalar_add(o.data(), a.data(), b.data());
  return o;
}
inline Sc sub(const Sc& a, const Sc& b) {
  Sc o;
  crypto_core_ristretto255_scalar_sub(o.data(), a.data(), b.data());
  return o;
}
inline Sc mul(const Sc& a, const Sc& b) {
  Sc o;
  crypto_core_ristretto255_scalar_mul(o.data(), a.data(), b.data());
  return o;
}
inline Sc inv(const Sc& a) {
  Sc o;
  crypto_core_ristretto255_scalar_invert(o.data(), a.data());
  return o;
}
inline Sc small(std::uint64_t v) {
  Sc o{};
  for (int i = 0; i < 8; ++i) o[i] = static_cast<unsigned char>(v >> (8 * i));
  return o;
}

// Scalar multiplication that accepts zero scalars (yields the identity).
inline Pt base(const Sc& s) {
  Pt o{};
  if (crypto_scalarmult_ristretto255_base(o.data(), s.data()) != 0) o.fill(0);
  return o;
}
inline Pt smul(const Pt& p, const Sc& s) {
  Pt o{};
  if (crypto_scalarmult_ristretto255(o.data(), s.data(), p.data()) != 0) o.fill(0);
  return o;
}
inline Pt padd(const Pt& a, const Pt& b) {
  Pt o;
  crypto_core_ristretto255_add(o.data(), a.data(), b.data());
  return o;
}

inline Sc challenge(const Pt& R, const Pt& pk, std::string_view msg_bytes) {
  Buf b;
  put_raw(b, R);
  put_raw(b, pk);
  put_var(b, msg_bytes);
  return h2s("HOTMPC-v1/challenge", b);
}

// Plain verifier: z*G == R + c*PK.
inline bool verify(const Pt& pk, std::string_view msg, const std::array<unsigned char, 64>& sig) {
  Pt R;
  Sc z;
  std::copy(sig.begin(), sig.begin() + 32, R.begin());
  std::copy(sig.begin() + 32, sig.end(), z.begin());
  if (!crypto_core_ristretto255_is_valid_point(R.data())) return false;
  return base(z) == padd(R, smul(pk, challenge(R, pk, msg)));
}

// f(0) from (x, f(x)) pairs.
inline Sc interpolate_zero(const std::map<std::uint32_t, Sc>& pts) {
  Sc acc{};
  for (const auto& [xi, yi] : pts) {
    Sc num = small(1), den = small(1);
    for (const auto& [xj, _] : pts) {
      if (xj == xi) continue;
      num = mul(num, small(xj));
      den = mul(den, sub(small(xj), small(xi)));
    }
    acc = add(acc, mul(yi, mul(num, inv(den))));
  }
  return acc;
}

struct Commit {
  Pt hiding;
  Pt binding;
};

inline Buf commitment_list(const std::map<std::uint32_t, Commit>& cs) {
  Buf b;
  put_u32(b, static_cast<std::uint32_t>(cs.size()));
  for (const auto& [id, c] : cs) {
    put_u32(b, id);
    put_raw(b, c.hiding);
    put_raw(b, c.binding);
  }
  return b;
}

inline Sc binding(std::uint32_t id, std::string_view msg, const Buf& list) {
  Buf b;
  put_u32(b, id);
  put_var(b, msg);
  put_var(b, list);
  return h2s("HOTMPC-v1/binding", b);
}

inline Sc tweak(const Pt& root, const std::array<unsigned char, 32>& key_id) {
  Buf b;
  put_raw(b, root);
  put_raw(b, key_id);
  return h2s("HOTMPC-v1/tweak", b);
}

// Single-key Schnorr signature with the aggregate nonce r = sum(d_i + rho_i e_i)
// and the reconstructed secret x: (r*G, r + c*x).
inline std::array<unsigned char, 64> single_key_signature(const Sc& x, std::string_view msg,
                                                          const std::map<std::uint32_t, std::pair<Sc, Sc>>& nonces) {
  std::map<std::uint32_t, Commit> cs;
  for (const auto& [id, de] : nonces) cs[id] = {base(de.first), base(de.second)};
  auto list = commitment_list(cs);
  Sc r{};
  for (const auto& [id, de] : nonces) r = add(r, add(de.first, mul(binding(id, msg, list), de.second)));
  Pt R = base(r);
  Pt pk = base(x);
  Sc z = add(r, mul(challenge(R, pk, msg), x));
  std::array<unsigned char, 64> out;
  std::copy(R.begin(), R.end(), out.begin());
  std::copy(z.begin(), z.end(), out.begin() + 32);
  return out;
}

}  // namespace roracle
