#pragma once

#include <sodium.h>

#include <algorithm>
#include <cstdint>
#include <optional>
#include <string>

#include "hotmpc/common/bytes.hpp"

namespace hotmpc::crypto {

// ristretto255 via libsodium: a prime-order group of order
// L = 2^252 + 27742317777372353535851937790883648493 with canonical 32-byte
// encodings for both elements and scalars (little-endian).
struct Ristretto255 {
  using ScalarRep = ByteArray<32>;
  using ElementRep = ByteArray<32>;

  static constexpr std::size_t kScalarBytes = 32;
  static constexpr std::size_t kElementBytes = 32;

  // L, little-endian.
  static constexpr ByteArray<32> kOrder = {0xed, 0xd3, 0xf5, 0x5c, 0x1a, 0x63, 0x12, 0x58, 0xd6, 0x9c, 0xf7,
                                           0xa2, 0xde, 0xf9, 0xde, 0x14, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00,
                                           0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x10};

  static std::string name() { return "ristretto255"; }

  static ScalarRep scalar_from_u64(std::uint64_t v) {
    ScalarRep out{};
    for (int i = 0; i < 8; ++i) out[i] = static_cast<std::uint8_t>(v >> (8 * i));
    return out;
  }
  static ScalarRep scalar_from_wide(const Digest64& wide) {
    ScalarRep out{};
    crypto_core_ristretto255_scalar_reduce(out.data(), wide.data());
    return out;
  }
  static ScalarRep scalar_add(const ScalarRep& a, const ScalarRep& b) {
    ScalarRep out{};
    crypto_core_ristretto255_scalar_add(out.data(), a.data(), b.data());
    return out;
  }
  static ScalarRep scalar_sub(const ScalarRep& a, const ScalarRep& b) {
    ScalarRep out{};
    crypto_core_ristretto255_scalar_sub(out.data(), a.data(), b.data());
    return out;
  }
  static ScalarRep scalar_mul(const ScalarRep& a, const ScalarRep& b) {
    ScalarRep out{};
    crypto_core_ristretto255_scalar_mul(out.data(), a.data(), b.data());
    return out;
  }
  static ScalarRep scalar_neg(const ScalarRep& a) {
    ScalarRep out{};
    crypto_core_ristretto255_scalar_negate(out.data(), a.data());
    return out;
  }
  static std::optional<ScalarRep> scalar_inv(const ScalarRep& a) {
    ScalarRep out{};
    if (crypto_core_ristretto255_scalar_invert(out.data(), a.data()) != 0) return std::nullopt;
    return out;
  }
  static bool scalar_is_zero(const ScalarRep& a) { return sodium_is_zero(a.data(), a.size()) == 1; }
  static ByteArray<32> scalar_encode(const ScalarRep& a) { return a; }
  static std::optional<ScalarRep> scalar_decode(ByteView b) {
    if (b.size() != kScalarBytes) return std::nullopt;
    // canonical iff value < L; compare from the most significant byte
    for (int i = 31; i >= 0; --i) {
      if (b[i] < kOrder[i]) break;
      if (b[i] > kOrder[i] || i == 0) return std::nullopt;
    }
    ScalarRep out{};
    std::copy(b.begin(), b.end(), out.begin());
    return out;
  }

  static ElementRep element_identity() { return ElementRep{}; }
  static ElementRep element_add(const ElementRep& a, const ElementRep& b) {
    ElementRep out{};
    crypto_core_ristretto255_add(out.data(), a.data(), b.data());
    return out;
  }
  static ElementRep element_mul(const ElementRep& e, const ScalarRep& s) {
    ElementRep out{};
    // libsodium reports an identity result as failure; the output is then the
    // identity encoding, which is what we want.
    if (crypto_scalarmult_ristretto255(out.data(), s.data(), e.data()) != 0) out.fill(0);
    return out;
  }
  static ElementRep element_base_mul(const ScalarRep& s) {
    ElementRep out{};
    if (crypto_scalarmult_ristretto255_base(out.data(), s.data()) != 0) out.fill(0);
    return out;
  }
  static ByteArray<32> element_encode(const ElementRep& e) { return e; }
  static std::optional<ElementRep> element_decode(ByteView b) {
    if (b.size() != kElementBytes) return std::nullopt;
    if (crypto_core_ristretto255_is_valid_point(b.data()) != 1) return std::nullopt;
    ElementRep out{};
    std::copy(b.begin(), b.end(), out.begin());
    return out;
  }
};

}  // namespace hotmpc::crypto
