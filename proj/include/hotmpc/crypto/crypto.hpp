#pragma once

#include "hotmpc/crypto/codec.hpp"
#include "hotmpc/crypto/derive.hpp"
#include "hotmpc/crypto/dkg.hpp"
#include "hotmpc/crypto/frost.hpp"
#include "hotmpc/crypto/group.hpp"
#include "hotmpc/crypto/keys.hpp"
#include "hotmpc/crypto/lagrange.hpp"
#include "hotmpc/crypto/polynomial.hpp"
#include "hotmpc/crypto/reshare.hpp"
#include "hotmpc/crypto/ristretto255.hpp"
#include "hotmpc/crypto/schnorr.hpp"
#include "hotmpc/crypto/toy_group.hpp"
#include "hotmpc/crypto/vss.hpp"

namespace hotmpc {

// Group used by the running system (nodes, gatekeepers, contracts).
using Group = crypto::Ristretto255;
using SecretScalar = crypto::Scalar<Group>;
using PublicKey = crypto::Element<Group>;
using Signature = crypto::Signature<Group>;
using KeyPair = crypto::SchnorrKeyPair<Group>;
using KeyShare = crypto::KeyShare<Group>;
using PublicKeyPackage = crypto::PublicKeyPackage<Group>;

inline constexpr std::string_view kSchemeSchnorr = "schnorr-ristretto255";
// Reserved identifier; threshold ECDSA is not implemented.
inline constexpr std::string_view kSchemeEcdsa = "ecdsa-secp256k1";

}  // namespace hotmpc
