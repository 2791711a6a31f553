#pragma once

#include <map>
#include <span>

#include "hotmpc/crypto/lagrange.hpp"
#include "hotmpc/crypto/polynomial.hpp"

namespace hotmpc::crypto {

template <GroupBackend G>
struct VssDealing {
  VssCommitment<G> commitment;
  std::map<ParticipantId, Scalar<G>> shares;
};

inline void check_sharing_params(unsigned threshold, std::span<const ParticipantId> ids) {
  if (threshold < 1 || threshold > ids.size())
    throw Error(Errc::InvalidThreshold,
                "threshold " + std::to_string(threshold) + " outside [1, " + std::to_string(ids.size()) + "]");
  check_distinct_nonzero(ids, Errc::DuplicateParticipant);
}

// Shares an explicit polynomial among `ids`.
template <GroupBackend G>
VssDealing<G> vss_deal_polynomial(const Polynomial<G>& poly, std::span<const ParticipantId> ids) {
  check_sharing_params(poly.threshold(), ids);
  VssDealing<G> out{poly.commit(), {}};
  for (auto id : ids) {
    if (Scalar<G>::from_u64(id).is_zero())
      throw Error(Errc::DuplicateParticipant, "participant id is zero modulo the group order", id);
    out.shares.emplace(id, poly.evaluate(id));
  }
  return out;
}

template <GroupBackend G>
VssDealing<G> vss_deal(const Scalar<G>& secret, unsigned threshold, std::span<const ParticipantId> ids, Drbg& rng) {
  check_sharing_params(threshold, ids);
  return vss_deal_polynomial(Polynomial<G>::random(secret, threshold, rng), ids);
}

// share * G == sum_k id^k * C_k
template <GroupBackend G>
bool vss_verify_share(ParticipantId id, const Scalar<G>& share, const VssCommitment<G>& commitment) {
  if (id == 0 || commitment.empty()) return false;
  return Element<G>::base_mul(share) == commitment.evaluate(id);
}

}  // namespace hotmpc::crypto
