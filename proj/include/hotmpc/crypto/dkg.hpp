#pragma once

#include <map>
#include <optional>
#include <span>
#include <variant>
#include <vector>

#include "hotmpc/crypto/keys.hpp"
#include "hotmpc/crypto/vss.hpp"

// Joint-Feldman distributed key generation with a single complaint round.
//
// Round 1: every participant deals a random secret with Feldman commitments.
// Round 2: every participant checks the shares it received. A misverifying
// share yields a complaint; the accused dealer must reveal the share it sent.
// Any upheld complaint aborts the whole session. There is no share-recovery
// path, and a rushing dealer can bias the public key (accepted at this scale).

namespace hotmpc::crypto {

template <GroupBackend G>
struct DealerMessage {
  VssCommitment<G> commitment;
  Scalar<G> share;
};

struct Complaint {
  ParticipantId complainer = 0;
  ParticipantId dealer = 0;
  friend bool operator==(const Complaint&, const Complaint&) = default;
};

template <GroupBackend G>
struct DkgState {
  ParticipantId self_id = 0;
  unsigned threshold = 0;
  ParticipantList participants;
  VssCommitment<G> own_commitment;
  std::map<ParticipantId, Scalar<G>> sent_shares;
};

template <GroupBackend G>
struct DkgRound1 {
  VssCommitment<G> broadcast;
  std::map<ParticipantId, Scalar<G>> directed_shares;  // includes the dealer's own share
  DkgState<G> state;
};

template <GroupBackend G>
DkgRound1<G> dkg_round1(ParticipantId self_id, unsigned threshold, std::span<const ParticipantId> participants,
                        Drbg& rng) {
  check_sharing_params(threshold, participants);
  if (std::find(participants.begin(), participants.end(), self_id) == participants.end())
    throw Error(Errc::IdNotInSet, "dealer not among participants", self_id);
  auto dealing = vss_deal(Scalar<G>::random(rng), threshold, participants, rng);
  DkgState<G> state{self_id, threshold, ParticipantList(participants.begin(), participants.end()),
                    dealing.commitment, dealing.shares};
  return {dealing.commitment, dealing.shares, std::move(state)};
}

template <GroupBackend G>
using DkgResult = std::variant<KeyShare<G>, std::vector<Complaint>>;

template <GroupBackend G>
DkgResult<G> dkg_round2(const DkgState<G>& state, const std::map<ParticipantId, DealerMessage<G>>& received) {
  for (auto id : state.participants)
    if (!received.contains(id)) throw Error(Errc::MissingDealer, "no round-1 message from " + std::to_string(id), id);

  std::vector<Complaint> complaints;
  for (const auto& [dealer, msg] : received) {
    bool ok = msg.commitment.size() == state.threshold && vss_verify_share(state.self_id, msg.share, msg.commitment);
    if (!ok) complaints.push_back({state.self_id, dealer});
  }
  if (!complaints.empty()) return complaints;

  VssCommitment<G> aggregate;
  Scalar<G> share;
  for (const auto& [dealer, msg] : received) {
    aggregate = aggregate + msg.commitment;
    share += msg.share;
  }
  auto pkg = PublicKeyPackage<G>::from_commitment(aggregate, state.participants);
  return KeyShare<G>{state.self_id,      share, pkg.group_public_key, state.threshold, state.participants,
                     pkg.verification_shares};
}

// A complaint is upheld unless the dealer reveals a share that verifies
// against its broadcast commitment. A dealer that stays silent loses.
template <GroupBackend G>
bool complaint_upheld(const Complaint& complaint, const std::optional<Scalar<G>>& revealed,
                      const VssCommitment<G>& dealer_commitment) {
  if (!revealed) return true;
  return !vss_verify_share(complaint.complainer, *revealed, dealer_commitment);
}

// Throws SessionAborted naming the first upheld dealer; returns the list of
// dismissed complaints otherwise.
template <GroupBackend G, class RevealFn>
std::vector<Complaint> adjudicate_complaints(const std::vector<Complaint>& complaints,
                                             const std::map<ParticipantId, VssCommitment<G>>& commitments,
                                             RevealFn&& reveal) {
  std::vector<Complaint> dismissed;
  std::vector<ParticipantId> upheld;
  for (const auto& c : complaints) {
    auto it = commitments.find(c.dealer);
    std::optional<Scalar<G>> revealed = reveal(c);
    if (it == commitments.end() || complaint_upheld<G>(c, revealed, it->second))
      upheld.push_back(c.dealer);
    else
      dismissed.push_back(c);
  }
  if (!upheld.empty()) {
    std::string who;
    for (auto d : upheld) who += (who.empty() ? "" : ",") + std::to_string(d);
    throw Error(Errc::SessionAborted, "upheld complaint against dealer(s) " + who, upheld.front());
  }
  return dismissed;
}

// In-process run of the whole protocol. `tamper` may rewrite a directed share
// before delivery: tamper(dealer, recipient, share).
template <GroupBackend G, class Tamper>
std::map<ParticipantId, KeyShare<G>> run_dkg(unsigned threshold, std::span<const ParticipantId> participants,
                                              Drbg& rng, Tamper&& tamper) {
  std::map<ParticipantId, DkgRound1<G>> round1;
  const Drbg session(rng.bytes<32>());
  for (auto id : participants) {
    auto child = session.fork("dkg/" + std::to_string(id));
    round1.emplace(id, dkg_round1<G>(id, threshold, participants, child));
  }
  std::map<ParticipantId, KeyShare<G>> out;
  std::vector<Complaint> complaints;
  std::map<ParticipantId, VssCommitment<G>> commitments;
  for (const auto& [dealer, r1] : round1) commitments.emplace(dealer, r1.broadcast);
  for (auto self : participants) {
    std::map<ParticipantId, DealerMessage<G>> inbox;
    for (const auto& [dealer, r1] : round1)
      inbox.emplace(dealer, DealerMessage<G>{r1.broadcast, tamper(dealer, self, r1.directed_shares.at(self))});
    auto result = dkg_round2<G>(round1.at(self).state, inbox);
    if (auto* ks = std::get_if<KeyShare<G>>(&result))
      out.emplace(self, std::move(*ks));
    else
      for (const auto& c : std::get<std::vector<Complaint>>(result)) complaints.push_back(c);
  }
  if (!complaints.empty()) {
    adjudicate_complaints<G>(complaints, commitments, [&](const Complaint& c) -> std::optional<Scalar<G>> {
      // the dealer reveals exactly what was delivered
      return tamper(c.dealer, c.complainer, round1.at(c.dealer).directed_shares.at(c.complainer));
    });
  }
  return out;
}

template <GroupBackend G>
std::map<ParticipantId, KeyShare<G>> run_dkg(unsigned threshold, std::span<const ParticipantId> participants,
                                              Drbg& rng) {
  return run_dkg<G>(threshold, participants, rng, [](ParticipantId, ParticipantId, const Scalar<G>& s) { return s; });
}

}  // namespace hotmpc::crypto
