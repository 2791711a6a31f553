#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "hotmpc/common/bytes.hpp"

namespace hotmpc::crypto {

// The order-23 subgroup of Z_47^*, generated by 25. Small enough that every
// protocol identity can be checked by exhaustive enumeration in tests. Not
// constant time and offers no security.
struct ToyGroup {
  using ScalarRep = std::uint32_t;   // 0..22
  using ElementRep = std::uint32_t;  // member of <25> in Z_47^*

  static constexpr std::uint32_t kModulus = 47;
  static constexpr std::uint32_t kOrder = 23;
  static constexpr std::uint32_t kGenerator = 25;
  static constexpr std::size_t kScalarBytes = 1;
  static constexpr std::size_t kElementBytes = 1;

  static std::string name() { return "toy23"; }

  static ScalarRep scalar_from_u64(std::uint64_t v) { return static_cast<ScalarRep>(v % kOrder); }
  static ScalarRep scalar_from_wide(const Digest64& wide) {
    std::uint32_t acc = 0;
    for (auto b : wide) acc = (acc * 256 + b) % kOrder;
    return acc;
  }
  static ScalarRep scalar_add(ScalarRep a, ScalarRep b) { return (a + b) % kOrder; }
  static ScalarRep scalar_sub(ScalarRep a, ScalarRep b) { return (a + kOrder - b) % kOrder; }
  static ScalarRep scalar_mul(ScalarRep a, ScalarRep b) { return (a * b) % kOrder; }
  static ScalarRep scalar_neg(ScalarRep a) { return (kOrder - a) % kOrder; }
  static std::optional<ScalarRep> scalar_inv(ScalarRep a) {
    if (a == 0) return std::nullopt;
    return pow_mod(a, kOrder - 2, kOrder);
  }
  static bool scalar_is_zero(ScalarRep a) { return a == 0; }
  static ByteArray<1> scalar_encode(ScalarRep a) { return {static_cast<std::uint8_t>(a)}; }
  static std::optional<ScalarRep> scalar_decode(ByteView b) {
    if (b.size() != 1 || b[0] >= kOrder) return std::nullopt;
    return b[0];
  }

  static ElementRep element_identity() { return 1; }
  static ElementRep element_add(ElementRep a, ElementRep b) { return (a * b) % kModulus; }
  static ElementRep element_mul(ElementRep e, ScalarRep s) { return pow_mod(e, s, kModulus); }
  static ElementRep element_base_mul(ScalarRep s) { return pow_mod(kGenerator, s, kModulus); }
  static ByteArray<1> element_encode(ElementRep e) { return {static_cast<std::uint8_t>(e)}; }
  static std::optional<ElementRep> element_decode(ByteView b) {
    if (b.size() != 1 || b[0] == 0 || b[0] >= kModulus) return std::nullopt;
    // subgroup membership: x^q == 1
    if (pow_mod(b[0], kOrder, kModulus) != 1) return std::nullopt;
    return b[0];
  }

  static std::uint32_t pow_mod(std::uint32_t base, std::uint32_t exp, std::uint32_t mod) {
    std::uint64_t result = 1, b = base % mod;
    while (exp > 0) {
      if (exp & 1) result = result * b % mod;
      b = b * b % mod;
      exp >>= 1;
    }
    return static_cast<std::uint32_t>(result);
  }
};

}  // namespace hotmpc::crypto
