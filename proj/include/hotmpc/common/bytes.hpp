#pragma once

#include <sodium.h>

#include <array>
#include <compare>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "hotmpc/common/error.hpp"

namespace hotmpc {

using Bytes = std::vector<std::uint8_t>;
using ByteView = std::span<const std::uint8_t>;
template <std::size_t N>
using ByteArray = std::array<std::uint8_t, N>;
using Digest32 = ByteArray<32>;
using Digest64 = ByteArray<64>;

namespace detail {
inline const bool sodium_ready = [] {
  if (sodium_init() < 0) throw std::runtime_error("libsodium initialization failed");
  return true;
}();
}  // namespace detail

inline ByteView as_bytes(std::string_view s) {
  return {reinterpret_cast<const std::uint8_t*>(s.data()), s.size()};
}

inline std::string to_hex(ByteView data) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out;
  out.reserve(data.size() * 2);
  for (auto b : data) {
    out.push_back(kDigits[b >> 4]);
    out.push_back(kDigits[b & 0x0f]);
  }
  return out;
}

// Strict: lowercase only, even length. Uppercase input is rejected so that a
// hex string has exactly one accepted spelling.
inline std::optional<Bytes> from_hex(std::string_view hex) {
  if (hex.size() % 2 != 0) return std::nullopt;
  auto nibble = [](char c) -> int {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    return -1;
  };
  Bytes out(hex.size() / 2);
  for (std::size_t i = 0; i < out.size(); ++i) {
    int hi = nibble(hex[2 * i]);
    int lo = nibble(hex[2 * i + 1]);
    if (hi < 0 || lo < 0) return std::nullopt;
    out[i] = static_cast<std::uint8_t>((hi << 4) | lo);
  }
  return out;
}

template <std::size_t N>
std::optional<ByteArray<N>> array_from_hex(std::string_view hex) {
  auto bytes = from_hex(hex);
  if (!bytes || bytes->size() != N) return std::nullopt;
  ByteArray<N> out{};
  std::copy(bytes->begin(), bytes->end(), out.begin());
  return out;
}

// Length-prefixed builder for hash and signature inputs.
class ByteWriter {
 public:
  ByteWriter& raw(ByteView data) {
    buf_.insert(buf_.end(), data.begin(), data.end());
    return *this;
  }
  ByteWriter& u8(std::uint8_t v) {
    buf_.push_back(v);
    return *this;
  }
  ByteWriter& u32(std::uint32_t v) {
    for (int shift = 24; shift >= 0; shift -= 8) buf_.push_back(static_cast<std::uint8_t>(v >> shift));
    return *this;
  }
  ByteWriter& u64(std::uint64_t v) {
    for (int shift = 56; shift >= 0; shift -= 8) buf_.push_back(static_cast<std::uint8_t>(v >> shift));
    return *this;
  }
  ByteWriter& var(ByteView data) {
    u64(data.size());
    return raw(data);
  }
  ByteWriter& str(std::string_view s) { return var(as_bytes(s)); }

  const Bytes& bytes() const& { return buf_; }
  Bytes bytes() && { return std::move(buf_); }

 private:
  Bytes buf_;
};

inline Digest32 sha256(ByteView data) {
  Digest32 out{};
  crypto_hash_sha256(out.data(), data.data(), data.size());
  return out;
}

inline Digest64 sha512(ByteView data) {
  Digest64 out{};
  crypto_hash_sha512(out.data(), data.data(), data.size());
  return out;
}

inline Digest32 sha256(std::string_view s) { return sha256(as_bytes(s)); }

// 32-byte key identifier; reserved through the key registry and used as the
// derivation tweak input.
class KeyId {
 public:
  static constexpr std::size_t kSize = 32;

  KeyId() = default;
  explicit KeyId(const ByteArray<kSize>& bytes) : bytes_(bytes) {}

  static KeyId from_bytes(ByteView bytes) {
    if (bytes.size() != kSize)
      throw Error(Errc::InvalidKeyIdLength, "key_id must be 32 bytes, got " + std::to_string(bytes.size()));
    ByteArray<kSize> arr{};
    std::copy(bytes.begin(), bytes.end(), arr.begin());
    return KeyId(arr);
  }

  static KeyId from_hex(std::string_view hex) {
    auto bytes = hotmpc::from_hex(hex);
    if (!bytes) throw Error(Errc::InvalidKeyIdLength, "key_id is not lowercase hex");
    return from_bytes(*bytes);
  }

  const ByteArray<kSize>& bytes() const { return bytes_; }
  std::string hex() const { return to_hex(bytes_); }

  auto operator<=>(const KeyId&) const = default;

 private:
  ByteArray<kSize> bytes_{};
};

// Deterministic random bit generator (ChaCha20 keyed by a 32-byte seed).
// Every draw uses a fresh subkey H(key || counter), so the output sequence
// depends only on the seed and the order of calls.
class Drbg {
 public:
  Drbg() : Drbg(0) {}
  explicit Drbg(std::uint64_t seed) : key_(sha256(ByteWriter().str("hotmpc/drbg/seed").u64(seed).bytes())) {}
  explicit Drbg(const Digest32& key, std::uint64_t counter = 0) : key_(key), counter_(counter) {}

  void fill(std::span<std::uint8_t> out) {
    auto subkey = sha256(ByteWriter().raw(key_).u64(counter_++).bytes());
    randombytes_buf_deterministic(out.data(), out.size(), subkey.data());
  }

  template <std::size_t N>
  ByteArray<N> bytes() {
    ByteArray<N> out{};
    fill(out);
    return out;
  }

  std::uint64_t next_u64() {
    auto b = bytes<8>();
    std::uint64_t v = 0;
    for (auto x : b) v = (v << 8) | x;
    return v;
  }

  // Uniform in [lo, hi]; modulo bias is below 2^-40 for the ranges used here.
  std::uint64_t uniform(std::uint64_t lo, std::uint64_t hi) {
    if (hi <= lo) return lo;
    return lo + next_u64() % (hi - lo + 1);
  }

  double unit() { return static_cast<double>(next_u64() >> 11) / static_cast<double>(1ULL << 53); }

  // Independent child stream, stable regardless of how much the parent has drawn.
  Drbg fork(std::string_view label) const {
    return Drbg(sha256(ByteWriter().str("hotmpc/drbg/fork").raw(key_).str(label).bytes()));
  }

  const Digest32& key() const { return key_; }
  std::uint64_t counter() const { return counter_; }

 private:
  Digest32 key_{};
  std::uint64_t counter_ = 0;
};

}  // namespace hotmpc
