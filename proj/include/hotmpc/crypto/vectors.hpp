#pragma once

#include <json.hpp>
#include <string>
#include <vector>

#include "hotmpc/crypto/crypto.hpp"

// Known-answer vectors for the canonical encodings, hashing, single-key and
// threshold signing, and key derivation. Everything is a function of the seed,
// so a stored vector file pins the wire formats across builds.
//
// Encodings: scalars are little-endian mod q, elements use the group's
// canonical compressed form, signatures are R || z.

namespace hotmpc::crypto {

namespace detail {

template <GroupBackend G>
nlohmann::json group_vectors(std::uint64_t seed) {
  using S = Scalar<G>;
  using E = Element<G>;
  Drbg rng = Drbg(seed).fork("vectors/" + G::name());
  nlohmann::json v;
  v["group"] = G::name();
  v["scalar_bytes"] = G::kScalarBytes;
  v["element_bytes"] = G::kElementBytes;
  v["signature_bytes"] = Signature<G>::kBytes;

  auto& enc = v["encodings"] = nlohmann::json::array();
  for (std::uint64_t k : {0ull, 1ull, 2ull, 3ull, 12345ull}) {
    auto s = S::from_u64(k);
    enc.push_back({{"k", k}, {"scalar", to_hex(s.encode())}, {"k_times_base", to_hex(E::base_mul(s).encode())}});
  }
  auto minus_one = -S::one();
  enc.push_back({{"k", "q-1"}, {"scalar", to_hex(minus_one.encode())}, {"k_times_base", to_hex(E::base_mul(minus_one).encode())}});

  auto& h = v["hash_to_scalar"] = nlohmann::json::array();
  for (auto tag : {kChallengeTag, kBindingTag, kTweakTag, kNonceTag})
    for (std::string_view input : {"", "abc"})
      h.push_back({{"tag", tag}, {"input", input}, {"scalar", to_hex(hash_to_scalar<G>(tag, as_bytes(input)).encode())}});

  auto kp = SchnorrKeyPair<G>::generate(rng);
  const std::string msg = "hotmpc vector message";
  v["schnorr"] = {{"secret", to_hex(kp.secret.encode())},
                  {"public_key", to_hex(kp.public_key.encode())},
                  {"message", msg},
                  {"signature", kp.sign(as_bytes(msg)).hex()}};

  auto& d = v["derivation"] = nlohmann::json::array();
  for (int i = 0; i < 3; ++i) {
    auto key_id = KeyId(rng.bytes<32>());
    auto tweak = derive_tweak(key_id, kp.public_key);
    d.push_back({{"root_public_key", to_hex(kp.public_key.encode())},
                 {"key_id", key_id.hex()},
                 {"tweak", to_hex(tweak.encode())},
                 {"child_public_key", to_hex(derive_child_public(kp.public_key, tweak).encode())}});
  }

  const ParticipantList ids{1, 2, 3};
  const ParticipantList signers{1, 3};
  auto shares = run_dkg<G>(2, ids, rng);
  const auto pkg = shares.begin()->second.public_package();
  CommitmentList<G> commitments;
  std::map<ParticipantId, NoncePair<G>> nonces;
  for (auto id : signers) {
    auto [c, n] = sign_round1(shares.at(id), rng);
    commitments.emplace(id, c);
    nonces.emplace(id, std::move(n));
  }
  std::map<ParticipantId, SignatureShare<G>> sig_shares;
  for (auto id : signers)
    sig_shares.emplace(id, sign_round2(shares.at(id), nonces.at(id), as_bytes(msg), signers, commitments));
  auto sig = sign_aggregate(as_bytes(msg), signers, commitments, sig_shares, pkg);
  nlohmann::json share_j = nlohmann::json::object();
  for (const auto& [id, ks] : shares) share_j[std::to_string(id)] = to_hex(ks.share.encode());
  v["threshold"] = {{"threshold", 2},
                    {"participants", ids},
                    {"signers", signers},
                    {"group_public_key", to_hex(pkg.group_public_key.encode())},
                    {"shares", share_j},
                    {"message", msg},
                    {"signature", sig.hex()}};
  return v;
}

template <GroupBackend G>
std::vector<std::string> self_check(const nlohmann::json& v) {
  std::vector<std::string> bad;
  auto element = [](const nlohmann::json& hex) {
    auto b = from_hex(hex.get<std::string>());
    if (!b) throw Error(Errc::InvalidEncoding, "vector hex");
    return Element<G>::decode_or_throw(*b);
  };
  auto sig_ok = [&](const nlohmann::json& sec, const nlohmann::json& pk) {
    auto b = from_hex(sec.at("signature").get<std::string>());
    return b && verify<G>(as_bytes(sec.at("message").get<std::string>()), *b, element(pk));
  };
  if (!sig_ok(v.at("schnorr"), v.at("schnorr").at("public_key")))
    bad.push_back(G::name() + ": schnorr signature does not verify");
  if (!sig_ok(v.at("threshold"), v.at("threshold").at("group_public_key")))
    bad.push_back(G::name() + ": threshold signature does not verify");
  return bad;
}

}  // namespace detail

inline nlohmann::json generate_vectors(std::uint64_t seed = 1) {
  return {{"seed", seed},
          {"groups", {detail::group_vectors<Ristretto255>(seed), detail::group_vectors<ToyGroup>(seed)}},
          {"toy_derivation_example",
           {{"root_public_key", 12}, {"tweak", 3}, {"child_public_key",
             derive_child_public(Element<ToyGroup>::decode_or_throw(ByteArray<1>{12}), Scalar<ToyGroup>::from_u64(3))
                 .encode()[0]}}}};
}

// Mismatches between a stored vector file and this build; empty means the
// file is reproduced exactly and every signature in it verifies.
inline std::vector<std::string> check_vectors(const nlohmann::json& stored) {
  std::vector<std::string> bad;
  const auto fresh = generate_vectors(stored.at("seed").get<std::uint64_t>());
  for (const auto& g : stored.at("groups")) {
    const auto name = g.at("group").get<std::string>();
    auto mine = name == Ristretto255::name() ? detail::self_check<Ristretto255>(g) : detail::self_check<ToyGroup>(g);
    bad.insert(bad.end(), mine.begin(), mine.end());
  }
  if (fresh != stored) {
    auto diff = nlohmann::json::diff(stored, fresh);
    for (const auto& op : diff) bad.push_back("differs at " + op.at("path").get<std::string>());
  }
  return bad;
}

}  // namespace hotmpc::crypto
