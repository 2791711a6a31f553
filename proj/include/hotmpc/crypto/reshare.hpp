#pragma once

#include <map>
#include <span>
#include <variant>
#include <vector>

#include "hotmpc/crypto/dkg.hpp"

// Key resharing as a DKG instance whose dealers are the old share holders.
// Dealer j in the (agreed) dealer set S shares lambda_j^S * s_j under a fresh
// polynomial of the new threshold. Recipients check that the constant
// commitment equals lambda_j^S * Y_j, so no dealer can move the group secret;
// the sum of dealt constants is the old secret, hence the public key is kept.

namespace hotmpc::crypto {

template <GroupBackend G>
VssDealing<G> reshare_deal(const KeyShare<G>& old_share, std::span<const ParticipantId> dealer_set,
                           unsigned new_threshold, std::span<const ParticipantId> new_participants, Drbg& rng) {
  check_sharing_params(new_threshold, new_participants);
  auto lambda = lagrange_coefficient<G>(old_share.participant_id, dealer_set);
  return vss_deal(lambda * old_share.share, new_threshold, new_participants, rng);
}

template <GroupBackend G>
using ReshareResult = std::variant<KeyShare<G>, std::vector<Complaint>>;

template <GroupBackend G>
ReshareResult<G> reshare_receive(ParticipantId self_id, unsigned new_threshold,
                                 std::span<const ParticipantId> new_participants, const PublicKeyPackage<G>& old_public,
                                 std::span<const ParticipantId> dealer_set,
                                 const std::map<ParticipantId, DealerMessage<G>>& received) {
  if (dealer_set.size() < old_public.threshold)
    throw Error(Errc::InsufficientShares, "dealer set smaller than the old threshold");
  std::vector<Complaint> complaints;
  for (auto dealer : dealer_set) {
    auto it = received.find(dealer);
    if (it == received.end()) throw Error(Errc::MissingDealer, "no reshare message from " + std::to_string(dealer), dealer);
    const auto& msg = it->second;
    auto old_y = old_public.verification_shares.find(dealer);
    bool ok = old_y != old_public.verification_shares.end() && msg.commitment.size() == new_threshold &&
              msg.commitment.constant() == old_y->second * lagrange_coefficient<G>(dealer, dealer_set) &&
              vss_verify_share(self_id, msg.share, msg.commitment);
    if (!ok) complaints.push_back({self_id, dealer});
  }
  if (!complaints.empty()) return complaints;

  VssCommitment<G> aggregate;
  Scalar<G> share;
  for (auto dealer : dealer_set) {
    aggregate = aggregate + received.at(dealer).commitment;
    share += received.at(dealer).share;
  }
  if (!(aggregate.constant() == old_public.group_public_key))
    throw Error(Errc::MixedPublicKeys, "reshared key does not match the old group key");
  auto pkg = PublicKeyPackage<G>::from_commitment(aggregate, new_participants);
  return KeyShare<G>{self_id,
                     share,
                     pkg.group_public_key,
                     new_threshold,
                     ParticipantList(new_participants.begin(), new_participants.end()),
                     pkg.verification_shares};
}

// In-process resharing from the given old shares (all of them act as dealers).
template <GroupBackend G>
std::map<ParticipantId, KeyShare<G>> reshare(std::span<const KeyShare<G>> old_shares, unsigned new_threshold,
                                             std::span<const ParticipantId> new_participants, Drbg& rng) {
  if (old_shares.empty()) throw Error(Errc::InsufficientShares, "no old shares supplied");
  const auto& ref = old_shares.front();
  ParticipantList dealers;
  for (const auto& s : old_shares) {
    if (!(s.group_public_key == ref.group_public_key) || s.verification_shares != ref.verification_shares)
      throw Error(Errc::MixedPublicKeys, "old shares belong to different keys", s.participant_id);
    dealers.push_back(s.participant_id);
  }
  check_distinct_nonzero(dealers, Errc::DuplicateParticipant);
  if (old_shares.size() < ref.threshold)
    throw Error(Errc::InsufficientShares, "need " + std::to_string(ref.threshold) + " old shares, got " +
                                              std::to_string(old_shares.size()));
  check_sharing_params(new_threshold, new_participants);

  std::map<ParticipantId, VssDealing<G>> dealings;
  const Drbg session(rng.bytes<32>());
  for (const auto& s : old_shares) {
    auto child = session.fork("reshare/" + std::to_string(s.participant_id));
    dealings.emplace(s.participant_id, reshare_deal<G>(s, dealers, new_threshold, new_participants, child));
  }
  const auto old_public = ref.public_package();
  std::map<ParticipantId, KeyShare<G>> out;
  for (auto self : new_participants) {
    std::map<ParticipantId, DealerMessage<G>> inbox;
    for (const auto& [dealer, d] : dealings) inbox.emplace(dealer, DealerMessage<G>{d.commitment, d.shares.at(self)});
    auto result = reshare_receive<G>(self, new_threshold, new_participants, old_public, dealers, inbox);
    if (auto* ks = std::get_if<KeyShare<G>>(&result))
      out.emplace(self, std::move(*ks));
    else
      throw Error(Errc::SessionAborted, "complaint raised during resharing",
                  std::get<std::vector<Complaint>>(result).front().dealer);
  }
  return out;
}

}  // namespace hotmpc::crypto
