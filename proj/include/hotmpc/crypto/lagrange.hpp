#pragma once

#include <algorithm>
#include <map>
#include <set>
#include <span>

#include "hotmpc/common/types.hpp"
#include "hotmpc/crypto/group.hpp"

namespace hotmpc::crypto {

inline void check_distinct_nonzero(std::span<const ParticipantId> ids, Errc on_duplicate) {
  std::set<ParticipantId> seen;
  for (auto id : ids) {
    if (id == 0) throw Error(on_duplicate, "participant id 0 is reserved for the secret");
    if (!seen.insert(id).second) throw Error(on_duplicate, "participant " + std::to_string(id) + " repeated", id);
  }
}

// Interpolation weight of `id` at x = 0 over `signer_set`:
//   prod_{j != id} j / (j - id)   (mod q)
template <GroupBackend G>
Scalar<G> lagrange_coefficient(ParticipantId id, std::span<const ParticipantId> signer_set) {
  check_distinct_nonzero(signer_set, Errc::DuplicateInSet);
  if (std::find(signer_set.begin(), signer_set.end(), id) == signer_set.end())
    throw Error(Errc::IdNotInSet, "participant " + std::to_string(id) + " not in signer set", id);

  auto num = Scalar<G>::one();
  auto den = Scalar<G>::one();
  const auto xi = Scalar<G>::from_u64(id);
  for (auto j : signer_set) {
    if (j == id) continue;
    const auto xj = Scalar<G>::from_u64(j);
    num *= xj;
    den *= (xj - xi);
  }
  auto inv = den.inverse();
  // Two distinct ids that collide mod q (only possible in tiny groups).
  if (!inv) throw Error(Errc::DuplicateInSet, "participant ids collide modulo the group order");
  return num * *inv;
}

// Reconstructs f(0) from points (id, f(id)).
template <GroupBackend G>
Scalar<G> interpolate_at_zero(const std::map<ParticipantId, Scalar<G>>& points) {
  std::vector<ParticipantId> ids;
  for (const auto& [id, _] : points) ids.push_back(id);
  Scalar<G> acc;
  for (const auto& [id, y] : points) acc += lagrange_coefficient<G>(id, ids) * y;
  return acc;
}

}  // namespace hotmpc::crypto
