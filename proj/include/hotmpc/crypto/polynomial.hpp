#pragma once

#include <vector>

#include "hotmpc/common/types.hpp"
#include "hotmpc/crypto/group.hpp"

namespace hotmpc::crypto {

template <GroupBackend G>
class VssCommitment;

// Sharing polynomial f(x) = a_0 + a_1 x + ... + a_{t-1} x^{t-1}; a_0 is the
// dealt secret and the number of coefficients is the threshold.
template <GroupBackend G>
class Polynomial {
 public:
  explicit Polynomial(std::vector<Scalar<G>> coefficients) : coeffs_(std::move(coefficients)) {
    if (coeffs_.empty()) throw Error(Errc::InvalidThreshold, "polynomial needs at least one coefficient");
  }

  static Polynomial random(const Scalar<G>& secret, unsigned threshold, Drbg& rng) {
    if (threshold == 0) throw Error(Errc::InvalidThreshold, "threshold must be positive");
    std::vector<Scalar<G>> coeffs{secret};
    for (unsigned k = 1; k < threshold; ++k) coeffs.push_back(Scalar<G>::random(rng));
    return Polynomial(std::move(coeffs));
  }

  // Horner evaluation.
  Scalar<G> evaluate(const Scalar<G>& x) const {
    Scalar<G> acc;
    for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) acc = acc * x + *it;
    return acc;
  }
  Scalar<G> evaluate(ParticipantId id) const { return evaluate(Scalar<G>::from_u64(id)); }

  const Scalar<G>& constant() const { return coeffs_.front(); }
  unsigned threshold() const { return static_cast<unsigned>(coeffs_.size()); }
  const std::vector<Scalar<G>>& coefficients() const { return coeffs_; }

  VssCommitment<G> commit() const;

 private:
  std::vector<Scalar<G>> coeffs_;
};

// Feldman commitments C_k = a_k * G to a sharing polynomial.
template <GroupBackend G>
class VssCommitment {
 public:
  VssCommitment() = default;
  explicit VssCommitment(std::vector<Element<G>> coefficients) : coeffs_(std::move(coefficients)) {}

  // sum_k id^k * C_k, i.e. f(id) * G for the committed polynomial.
  Element<G> evaluate(ParticipantId id) const {
    const auto x = Scalar<G>::from_u64(id);
    Element<G> acc;
    for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) acc = acc * x + *it;
    return acc;
  }

  const Element<G>& constant() const { return coeffs_.front(); }
  std::size_t size() const { return coeffs_.size(); }
  bool empty() const { return coeffs_.empty(); }
  const std::vector<Element<G>>& coefficients() const { return coeffs_; }

  // Coefficient-wise sum; shorter commitments are padded with the identity.
  friend VssCommitment operator+(const VssCommitment& a, const VssCommitment& b) {
    std::vector<Element<G>> out(std::max(a.size(), b.size()));
    for (std::size_t k = 0; k < out.size(); ++k) {
      if (k < a.size()) out[k] += a.coeffs_[k];
      if (k < b.size()) out[k] += b.coeffs_[k];
    }
    return VssCommitment(std::move(out));
  }

  friend bool operator==(const VssCommitment& a, const VssCommitment& b) { return a.coeffs_ == b.coeffs_; }

 private:
  std::vector<Element<G>> coeffs_;
};

template <GroupBackend G>
VssCommitment<G> Polynomial<G>::commit() const {
  std::vector<Element<G>> out;
  out.reserve(coeffs_.size());
  for (const auto& a : coeffs_) out.push_back(Element<G>::base_mul(a));
  return VssCommitment<G>(std::move(out));
}

}  // namespace hotmpc::crypto
