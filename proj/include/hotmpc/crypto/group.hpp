#pragma once

#include <concepts>
#include <cstdint>
#include <optional>
#include <string>

#include "hotmpc/common/bytes.hpp"

namespace hotmpc::crypto {

// A backend describing a prime-order group and its scalar field. All protocol
// code is written against Scalar<G>/Element<G>, never against a backend
// directly.
template <class G>
concept GroupBackend = requires(const typename G::ScalarRep& s, const typename G::ElementRep& e,
                                ByteView view, const Digest64& wide, std::uint64_t n) {
  typename G::ScalarRep;
  typename G::ElementRep;
  { G::kScalarBytes } -> std::convertible_to<std::size_t>;
  { G::kElementBytes } -> std::convertible_to<std::size_t>;
  { G::name() } -> std::convertible_to<std::string>;
  { G::scalar_from_u64(n) } -> std::same_as<typename G::ScalarRep>;
  { G::scalar_from_wide(wide) } -> std::same_as<typename G::ScalarRep>;
  { G::scalar_add(s, s) } -> std::same_as<typename G::ScalarRep>;
  { G::scalar_sub(s, s) } -> std::same_as<typename G::ScalarRep>;
  { G::scalar_mul(s, s) } -> std::same_as<typename G::ScalarRep>;
  { G::scalar_neg(s) } -> std::same_as<typename G::ScalarRep>;
  { G::scalar_inv(s) } -> std::same_as<std::optional<typename G::ScalarRep>>;
  { G::scalar_is_zero(s) } -> std::same_as<bool>;
  { G::scalar_encode(s) } -> std::same_as<ByteArray<G::kScalarBytes>>;
  { G::scalar_decode(view) } -> std::same_as<std::optional<typename G::ScalarRep>>;
  { G::element_identity() } -> std::same_as<typename G::ElementRep>;
  { G::element_add(e, e) } -> std::same_as<typename G::ElementRep>;
  { G::element_mul(e, s) } -> std::same_as<typename G::ElementRep>;
  { G::element_base_mul(s) } -> std::same_as<typename G::ElementRep>;
  { G::element_encode(e) } -> std::same_as<ByteArray<G::kElementBytes>>;
  { G::element_decode(view) } -> std::same_as<std::optional<typename G::ElementRep>>;
};

template <GroupBackend G>
class Scalar {
 public:
  using Rep = typename G::ScalarRep;
  static constexpr std::size_t kBytes = G::kScalarBytes;

  Scalar() : rep_(G::scalar_from_u64(0)) {}
  explicit Scalar(Rep rep) : rep_(std::move(rep)) {}

  static Scalar zero() { return Scalar(); }
  static Scalar one() { return from_u64(1); }
  static Scalar from_u64(std::uint64_t v) { return Scalar(G::scalar_from_u64(v)); }
  // Wide reduction of a 64-byte digest; bias is negligible for any q < 2^256.
  static Scalar from_wide(const Digest64& wide) { return Scalar(G::scalar_from_wide(wide)); }
  static Scalar random(Drbg& rng) { return from_wide(rng.bytes<64>()); }

  static std::optional<Scalar> decode(ByteView bytes) {
    auto rep = G::scalar_decode(bytes);
    if (!rep) return std::nullopt;
    return Scalar(*rep);
  }
  static Scalar decode_or_throw(ByteView bytes) {
    auto s = decode(bytes);
    if (!s) throw Error(Errc::InvalidEncoding, "non-canonical scalar for " + G::name());
    return *s;
  }

  ByteArray<kBytes> encode() const { return G::scalar_encode(rep_); }
  std::string hex() const { return to_hex(encode()); }

  std::optional<Scalar> inverse() const {
    auto inv = G::scalar_inv(rep_);
    if (!inv) return std::nullopt;
    return Scalar(*inv);
  }
  bool is_zero() const { return G::scalar_is_zero(rep_); }
  const Rep& rep() const { return rep_; }

  friend Scalar operator+(const Scalar& a, const Scalar& b) { return Scalar(G::scalar_add(a.rep_, b.rep_)); }
  friend Scalar operator-(const Scalar& a, const Scalar& b) { return Scalar(G::scalar_sub(a.rep_, b.rep_)); }
  friend Scalar operator*(const Scalar& a, const Scalar& b) { return Scalar(G::scalar_mul(a.rep_, b.rep_)); }
  Scalar operator-() const { return Scalar(G::scalar_neg(rep_)); }
  Scalar& operator+=(const Scalar& o) { return *this = *this + o; }
  Scalar& operator*=(const Scalar& o) { return *this = *this * o; }
  friend bool operator==(const Scalar& a, const Scalar& b) { return a.encode() == b.encode(); }

 private:
  Rep rep_;
};

template <GroupBackend G>
class Element {
 public:
  using Rep = typename G::ElementRep;
  static constexpr std::size_t kBytes = G::kElementBytes;

  Element() : rep_(G::element_identity()) {}
  explicit Element(Rep rep) : rep_(std::move(rep)) {}

  static Element identity() { return Element(); }
  static Element generator() { return base_mul(Scalar<G>::one()); }
  static Element base_mul(const Scalar<G>& s) { return Element(G::element_base_mul(s.rep())); }

  static std::optional<Element> decode(ByteView bytes) {
    auto rep = G::element_decode(bytes);
    if (!rep) return std::nullopt;
    return Element(*rep);
  }
  static Element decode_or_throw(ByteView bytes) {
    auto e = decode(bytes);
    if (!e) throw Error(Errc::InvalidEncoding, "invalid group element for " + G::name());
    return *e;
  }

  ByteArray<kBytes> encode() const { return G::element_encode(rep_); }
  std::string hex() const { return to_hex(encode()); }
  const Rep& rep() const { return rep_; }

  friend Element operator+(const Element& a, const Element& b) { return Element(G::element_add(a.rep_, b.rep_)); }
  friend Element operator-(const Element& a, const Element& b) {
    return a + b * Scalar<G>(G::scalar_neg(G::scalar_from_u64(1)));
  }
  friend Element operator*(const Element& e, const Scalar<G>& s) { return Element(G::element_mul(e.rep_, s.rep())); }
  friend Element operator*(const Scalar<G>& s, const Element& e) { return e * s; }
  Element& operator+=(const Element& o) { return *this = *this + o; }
  friend bool operator==(const Element& a, const Element& b) { return a.encode() == b.encode(); }

 private:
  Rep rep_;
};

}  // namespace hotmpc::crypto
