#pragma once

#include <map>
#include <span>

#include "hotmpc/crypto/keys.hpp"
#include "hotmpc/crypto/lagrange.hpp"
#include "hotmpc/crypto/schnorr.hpp"

// Two-round threshold Schnorr signing (FROST family).
//
// Round 1: signer i draws nonces (d_i, e_i) and publishes D_i = d_i G, E_i = e_i G.
// Round 2: with the full commitment list B,
//   rho_i = H_bind(i || message || B)
//   R     = sum_i (D_i + rho_i E_i)
//   c     = H_chal(R || PK || message)
//   z_i   = d_i + rho_i e_i + lambda_i s_i c
// Aggregation: z = sum z_i, signature (R, z). Each z_i is checked against
//   z_i G == D_i + rho_i E_i + c lambda_i Y_i
// so a bad share is attributed to its signer.

namespace hotmpc::crypto {

template <GroupBackend G>
struct NonceCommitment {
  ParticipantId participant_id = 0;
  Element<G> hiding;   // D
  Element<G> binding;  // E
  friend bool operator==(const NonceCommitment&, const NonceCommitment&) = default;
};

template <GroupBackend G>
using CommitmentList = std::map<ParticipantId, NonceCommitment<G>>;

// Secret round-1 material. Consumed by exactly one sign_round2 call.
template <GroupBackend G>
class NoncePair {
 public:
  NoncePair(ParticipantId id, Scalar<G> hiding, Scalar<G> binding)
      : id_(id), hiding_(std::move(hiding)), binding_(std::move(binding)) {}

  NoncePair(const NoncePair&) = delete;
  NoncePair& operator=(const NoncePair&) = delete;
  NoncePair(NoncePair&&) noexcept = default;
  NoncePair& operator=(NoncePair&&) noexcept = default;

  NonceCommitment<G> commitment() const {
    return {id_, Element<G>::base_mul(hiding_), Element<G>::base_mul(binding_)};
  }
  bool consumed() const { return consumed_; }

  // Hands out the nonces once; the pair is wiped afterwards.
  std::pair<Scalar<G>, Scalar<G>> take() {
    if (consumed_) throw Error(Errc::NonceReuse, "nonce pair already used", id_);
    consumed_ = true;
    auto out = std::make_pair(hiding_, binding_);
    hiding_ = Scalar<G>();
    binding_ = Scalar<G>();
    return out;
  }

 private:
  ParticipantId id_;
  Scalar<G> hiding_;
  Scalar<G> binding_;
  bool consumed_ = false;
};

template <GroupBackend G>
struct SignatureShare {
  ParticipantId participant_id = 0;
  Scalar<G> z;
};

template <GroupBackend G>
Bytes encode_commitment_list(const CommitmentList<G>& commitments) {
  ByteWriter w;
  w.u32(static_cast<std::uint32_t>(commitments.size()));
  for (const auto& [id, c] : commitments) w.u32(id).raw(c.hiding.encode()).raw(c.binding.encode());
  return std::move(w).bytes();
}

template <GroupBackend G>
Scalar<G> binding_factor(ParticipantId id, ByteView message, const Bytes& encoded_commitments) {
  return hash_to_scalar<G>(kBindingTag, ByteWriter().u32(id).var(message).var(encoded_commitments).bytes());
}

template <GroupBackend G>
Element<G> group_commitment(ByteView message, const CommitmentList<G>& commitments) {
  const auto encoded = encode_commitment_list(commitments);
  Element<G> R;
  for (const auto& [id, c] : commitments) R += c.hiding + c.binding * binding_factor<G>(id, message, encoded);
  return R;
}

namespace detail {
template <GroupBackend G>
void check_signing_inputs(unsigned threshold, std::span<const ParticipantId> signer_set,
                          const CommitmentList<G>& commitments) {
  check_distinct_nonzero(signer_set, Errc::DuplicateInSet);
  if (signer_set.size() != threshold)
    throw Error(Errc::WrongSignerCount, "expected " + std::to_string(threshold) + " signers, got " +
                                            std::to_string(signer_set.size()));
  for (auto id : signer_set)
    if (!commitments.contains(id)) throw Error(Errc::MissingCommitment, "no commitment from " + std::to_string(id), id);
  if (commitments.size() != signer_set.size())
    throw Error(Errc::MissingCommitment, "commitment list contains non-signers");
}
}  // namespace detail

template <GroupBackend G>
std::pair<NonceCommitment<G>, NoncePair<G>> sign_round1(const KeyShare<G>& share, Drbg& rng) {
  // Nonces are hedged with the share so a repeated rng state alone does not repeat them.
  auto draw = [&] {
    return hash_to_scalar<G>(kNonceTag, ByteWriter().raw(rng.bytes<32>()).raw(share.share.encode()).bytes());
  };
  auto d = draw();
  auto e = draw();
  NoncePair<G> pair(share.participant_id, d, e);
  auto commitment = pair.commitment();
  return {commitment, std::move(pair)};
}

template <GroupBackend G>
SignatureShare<G> sign_round2(const KeyShare<G>& share, NoncePair<G>& nonces, ByteView message,
                              std::span<const ParticipantId> signer_set, const CommitmentList<G>& commitments) {
  detail::check_signing_inputs<G>(share.threshold, signer_set, commitments);
  auto own = commitments.find(share.participant_id);
  if (own == commitments.end())
    throw Error(Errc::IdNotInSet, "signer not in signer set", share.participant_id);
  if (!(own->second == nonces.commitment()) && !nonces.consumed())
    throw Error(Errc::MissingCommitment, "published commitment does not match local nonces", share.participant_id);
  auto [d, e] = nonces.take();

  const auto encoded = encode_commitment_list(commitments);
  const auto R = group_commitment(message, commitments);
  const auto c = challenge(R, share.group_public_key, message);
  const auto rho = binding_factor<G>(share.participant_id, message, encoded);
  const auto lambda = lagrange_coefficient<G>(share.participant_id, signer_set);
  return {share.participant_id, d + rho * e + lambda * share.share * c};
}

template <GroupBackend G>
bool verify_signature_share(const SignatureShare<G>& s, ByteView message, std::span<const ParticipantId> signer_set,
                            const CommitmentList<G>& commitments, const PublicKeyPackage<G>& pkg) {
  auto y = pkg.verification_shares.find(s.participant_id);
  auto cm = commitments.find(s.participant_id);
  if (y == pkg.verification_shares.end() || cm == commitments.end()) return false;
  const auto encoded = encode_commitment_list(commitments);
  const auto R = group_commitment(message, commitments);
  const auto c = challenge(R, pkg.group_public_key, message);
  const auto rho = binding_factor<G>(s.participant_id, message, encoded);
  const auto lambda = lagrange_coefficient<G>(s.participant_id, signer_set);
  return Element<G>::base_mul(s.z) == cm->second.hiding + cm->second.binding * rho + y->second * (c * lambda);
}

template <GroupBackend G>
Signature<G> sign_aggregate(ByteView message, std::span<const ParticipantId> signer_set,
                            const CommitmentList<G>& commitments,
                            const std::map<ParticipantId, SignatureShare<G>>& shares, const PublicKeyPackage<G>& pkg) {
  detail::check_signing_inputs<G>(pkg.threshold, signer_set, commitments);
  Scalar<G> z;
  for (auto id : signer_set) {
    auto it = shares.find(id);
    if (it == shares.end() || !verify_signature_share(it->second, message, signer_set, commitments, pkg))
      throw Error(Errc::InvalidSignatureShare, "signature share from " + std::to_string(id) + " is invalid", id);
    z += it->second.z;
  }
  Signature<G> sig{group_commitment(message, commitments), z};
  if (!verify(message, sig, pkg.group_public_key))
    throw Error(Errc::InvalidSignatureShare, "aggregate failed verification");
  return sig;
}

}  // namespace hotmpc::crypto
