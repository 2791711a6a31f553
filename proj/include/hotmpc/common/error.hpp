#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace hotmpc {

// Every failure surfaced by the library carries one of these codes. The CLI
// maps a handful of them onto process exit codes.
enum class Errc {
  // crypto
  InvalidThreshold,
  DuplicateParticipant,
  IdNotInSet,
  DuplicateInSet,
  MissingDealer,
  ShareVerificationFailed,
  SessionAborted,
  InsufficientShares,
  MixedPublicKeys,
  InvalidKeyIdLength,
  NonceReuse,
  MissingCommitment,
  InvalidSignatureShare,
  WrongSignerCount,
  InvalidEncoding,
  // chainstate
  InvalidConfig,
  UnknownEpoch,
  NotParticipant,
  DuplicateVote,
  NoActiveProposal,
  BadSignature,
  CodeIdentityMismatch,
  UnknownParticipant,
  UnknownKeyId,
  // chainsim
  UnknownContract,
  UnknownChain,
  PolicyPanic,
  AlreadyBound,
  // node
  DeadlineExpired,
  UnknownGatekeeper,
  Unauthorized,
  AttestationExpired,
  Timeout,
  QuotaViolation,
  Declined,
  // gatekeeper
  QuotaExceeded,
  ThresholdUnavailable,
  MalformedRequest,
  // econ
  InsufficientBalance,
  BelowMinimum,
  EpochOpen,
  InsufficientFee,
  UnknownAccused,
  InvalidEvidence,
  NotMember,
  AlreadyExecuted,
  // harness
  UnknownTarget,
  AssertionFailed,
  ConfigError,
};

constexpr std::string_view to_string(Errc code) noexcept {
  switch (code) {
    case Errc::InvalidThreshold: return "InvalidThreshold";
    case Errc::DuplicateParticipant: return "DuplicateParticipant";
    case Errc::IdNotInSet: return "IdNotInSet";
    case Errc::DuplicateInSet: return "DuplicateInSet";
    case Errc::MissingDealer: return "MissingDealer";
    case Errc::ShareVerificationFailed: return "ShareVerificationFailed";
    case Errc::SessionAborted: return "SessionAborted";
    case Errc::InsufficientShares: return "InsufficientShares";
    case Errc::MixedPublicKeys: return "MixedPublicKeys";
    case Errc::InvalidKeyIdLength: return "InvalidKeyIdLength";
    case Errc::NonceReuse: return "NonceReuse";
    case Errc::MissingCommitment: return "MissingCommitment";
    case Errc::InvalidSignatureShare: return "InvalidSignatureShare";
    case Errc::WrongSignerCount: return "WrongSignerCount";
    case Errc::InvalidEncoding: return "InvalidEncoding";
    case Errc::InvalidConfig: return "InvalidConfig";
    case Errc::UnknownEpoch: return "UnknownEpoch";
    case Errc::NotParticipant: return "NotParticipant";
    case Errc::DuplicateVote: return "DuplicateVote";
    case Errc::NoActiveProposal: return "NoActiveProposal";
    case Errc::BadSignature: return "BadSignature";
    case Errc::CodeIdentityMismatch: return "CodeIdentityMismatch";
    case Errc::UnknownParticipant: return "UnknownParticipant";
    case Errc::UnknownKeyId: return "UnknownKeyId";
    case Errc::UnknownContract: return "UnknownContract";
    case Errc::UnknownChain: return "UnknownChain";
    case Errc::PolicyPanic: return "PolicyPanic";
    case Errc::AlreadyBound: return "AlreadyBound";
    case Errc::DeadlineExpired: return "DeadlineExpired";
    case Errc::UnknownGatekeeper: return "UnknownGatekeeper";
    case Errc::Unauthorized: return "Unauthorized";
    case Errc::AttestationExpired: return "AttestationExpired";
    case Errc::Timeout: return "Timeout";
    case Errc::QuotaViolation: return "QuotaViolation";
    case Errc::Declined: return "Declined";
    case Errc::QuotaExceeded: return "QuotaExceeded";
    case Errc::ThresholdUnavailable: return "ThresholdUnavailable";
    case Errc::MalformedRequest: return "MalformedRequest";
    case Errc::InsufficientBalance: return "InsufficientBalance";
    case Errc::BelowMinimum: return "BelowMinimum";
    case Errc::EpochOpen: return "EpochOpen";
    case Errc::InsufficientFee: return "InsufficientFee";
    case Errc::UnknownAccused: return "UnknownAccused";
    case Errc::InvalidEvidence: return "InvalidEvidence";
    case Errc::NotMember: return "NotMember";
    case Errc::AlreadyExecuted: return "AlreadyExecuted";
    case Errc::UnknownTarget: return "UnknownTarget";
    case Errc::AssertionFailed: return "AssertionFailed";
    case Errc::ConfigError: return "ConfigError";
  }
  return "Unknown";
}

inline std::optional<Errc> errc_from_string(std::string_view name) {
  for (int i = 0; i <= static_cast<int>(Errc::ConfigError); ++i) {
    auto code = static_cast<Errc>(i);
    if (to_string(code) == name) return code;
  }
  return std::nullopt;
}

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& detail, std::optional<std::uint32_t> party = std::nullopt)
      : std::runtime_error(std::string(to_string(code)) + (detail.empty() ? "" : ": " + detail)),
        code_(code),
        party_(party) {}

  Errc code() const noexcept { return code_; }

  // Participant blamed by the error, e.g. the dealer behind a bad share.
  std::optional<std::uint32_t> party() const noexcept { return party_; }

 private:
  Errc code_;
  std::optional<std::uint32_t> party_;
};

// Process exit codes: 0 ok, 2 unauthorized, 3 threshold unavailable, 4 quota,
// 5 failed assertion, 1 anything else.
inline int exit_code(Errc code) {
  switch (code) {
    case Errc::Unauthorized: return 2;
    case Errc::ThresholdUnavailable: return 3;
    case Errc::QuotaExceeded:
    case Errc::QuotaViolation: return 4;
    case Errc::AssertionFailed: return 5;
    default: return 1;
  }
}

}  // namespace hotmpc
