#pragma once

#include <algorithm>
#include <map>
#include <vector>

#include "hotmpc/common/types.hpp"
#include "hotmpc/crypto/group.hpp"
#include "hotmpc/crypto/polynomial.hpp"

namespace hotmpc::crypto {

// Public side of a threshold key: the group key plus every participant's
// verification share Y_i = s_i * G, used to check individual signature shares.
template <GroupBackend G>
struct PublicKeyPackage {
  Element<G> group_public_key;
  std::map<ParticipantId, Element<G>> verification_shares;
  unsigned threshold = 0;

  ParticipantList participants() const {
    ParticipantList out;
    for (const auto& [id, _] : verification_shares) out.push_back(id);
    return out;
  }

  static PublicKeyPackage from_commitment(const VssCommitment<G>& aggregate, std::span<const ParticipantId> ids) {
    PublicKeyPackage pkg;
    pkg.group_public_key = aggregate.constant();
    pkg.threshold = static_cast<unsigned>(aggregate.size());
    for (auto id : ids) pkg.verification_shares.emplace(id, aggregate.evaluate(id));
    return pkg;
  }

  friend bool operator==(const PublicKeyPackage&, const PublicKeyPackage&) = default;
};

// One participant's Shamir share of the group secret.
template <GroupBackend G>
struct KeyShare {
  ParticipantId participant_id = 0;
  Scalar<G> share;
  Element<G> group_public_key;
  unsigned threshold = 0;
  ParticipantList participant_set;
  std::map<ParticipantId, Element<G>> verification_shares;

  PublicKeyPackage<G> public_package() const { return {group_public_key, verification_shares, threshold}; }

  // share * G matches the published verification share.
  bool consistent() const {
    auto it = verification_shares.find(participant_id);
    return it != verification_shares.end() && Element<G>::base_mul(share) == it->second &&
           std::find(participant_set.begin(), participant_set.end(), participant_id) != participant_set.end() &&
           threshold >= 1 && threshold <= participant_set.size();
  }
};

}  // namespace hotmpc::crypto
