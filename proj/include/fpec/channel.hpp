// Copyright 2026 The fpec Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "fpec/errors.hpp"
#include "fpec/pauli.hpp"

namespace fpec {

/// Channels act on a gate's support; 6 qubits keeps dense 4^n tables small.
inline constexpr unsigned kMaxChannelArity = 6;

/// Tolerance on the probability sum; smaller deviations are renormalized.
inline constexpr double kProbabilityTolerance = 1e-12;

/// PTM eigenvalues below this magnitude make a channel non-invertible.
inline constexpr double kSingularThreshold = 1e-10;

namespace detail {

inline void check_arity(unsigned arity, const char* who) {
  if (arity == 0 || arity > kMaxChannelArity) {
    throw PreconditionError(std::string(who) + ": arity must be in [1, " +
                            std::to_string(kMaxChannelArity) + "]");
  }
}

/// Forward transform over the commutation-sign matrix:
/// out[Q] = sum_P in[P] * s(P, Q).
inline std::vector<double> sign_transform(std::span<const double> in,
                                          unsigned arity) {
  const std::uint64_t count = pauli_count(arity);
  std::vector<std::uint64_t> xs(count), zs(count);
  for (std::uint64_t p = 0; p < count; ++p) pauli_index_masks(p, arity, xs[p], zs[p]);
  std::vector<double> out(count, 0.0);
  for (std::uint64_t q = 0; q < count; ++q) {
    double acc = 0.0;
    for (std::uint64_t p = 0; p < count; ++p) {
      if (in[p] == 0.0) continue;
      const bool anti = std::popcount((xs[p] & zs[q]) ^ (zs[p] & xs[q])) & 1;
      acc += anti ? -in[p] : in[p];
    }
    out[q] = acc;
  }
  return out;
}

}  // namespace detail

/// Signed linear combination of Pauli conjugations, rho -> sum_P w_P P rho P.
///
/// Covers both physical stochastic Pauli channels and their (unphysical)
/// quasi-probability inverses. Weights are stored densely by Pauli index.
class PauliMixture {
 public:
  PauliMixture() = default;

  PauliMixture(unsigned arity, std::vector<double> weights)
      : arity_(arity), weights_(std::move(weights)) {
    detail::check_arity(arity, "PauliMixture");
    if (weights_.size() != pauli_count(arity)) {
      throw PreconditionError("PauliMixture: expected 4^arity weights");
    }
  }

  static PauliMixture single(const PauliString& p, double weight = 1.0) {
    std::vector<double> w(pauli_count(p.size()), 0.0);
    w[p.index()] = weight;
    return PauliMixture(p.size(), std::move(w));
  }

  unsigned arity() const { return arity_; }
  std::span<const double> weights() const { return weights_; }
  double weight(std::uint64_t index) const { return weights_.at(index); }

  /// Trace scaling factor, sum_P w_P (1 for trace-preserving maps).
  double trace_factor() const {
    double s = 0.0;
    for (double w : weights_) s += w;
    return s;
  }

 private:
  unsigned arity_ = 0;
  std::vector<double> weights_;
};

/// Eigenvalues of a Pauli-diagonal map in the Pauli transfer representation,
/// indexed by Pauli word.
struct PtmDiagonal {
  unsigned arity = 0;
  std::vector<double> entries;
};

/// Stochastic Pauli channel: applies Pauli word P with probability p_P.
class StochasticPauliChannel {
 public:
  StochasticPauliChannel() : StochasticPauliChannel(identity(1)) {}

  /// `probs` is dense over Pauli indices (size 4^arity).
  StochasticPauliChannel(unsigned arity, std::vector<double> probs)
      : arity_(arity), probs_(std::move(probs)) {
    detail::check_arity(arity, "StochasticPauliChannel");
    if (probs_.size() != pauli_count(arity)) {
      throw PreconditionError(
          "StochasticPauliChannel: expected 4^arity probabilities");
    }
    double sum = 0.0;
    for (double p : probs_) {
      if (!(p >= 0.0) || p > 1.0 + kProbabilityTolerance) {
        throw PreconditionError(
            "StochasticPauliChannel: probabilities must lie in [0, 1]");
      }
      sum += p;
    }
    if (std::abs(sum - 1.0) > kProbabilityTolerance) {
      throw PreconditionError("StochasticPauliChannel: probabilities sum to " +
                              std::to_string(sum) + ", not 1");
    }
    if (sum != 1.0) {
      for (double& p : probs_) p /= sum;
    }
    build_cdf();
  }

  static StochasticPauliChannel identity(unsigned arity) {
    detail::check_arity(arity, "StochasticPauliChannel");
    std::vector<double> probs(pauli_count(arity), 0.0);
    probs[0] = 1.0;
    return StochasticPauliChannel(arity, std::move(probs));
  }

  /// Builds a channel from (word, probability) pairs. When `infer_identity`
  /// is set and the identity is absent, it receives 1 - sum(others).
  static StochasticPauliChannel from_entries(
      unsigned arity, std::span<const std::pair<PauliString, double>> entries,
      bool infer_identity = true) {
    detail::check_arity(arity, "StochasticPauliChannel");
    std::vector<double> probs(pauli_count(arity), 0.0);
    std::vector<bool> seen(probs.size(), false);
    double others = 0.0;
    for (const auto& [word, p] : entries) {
      if (word.size() != arity) {
        throw PreconditionError("StochasticPauliChannel: word " + word.str() +
                                " does not match arity " +
                                std::to_string(arity));
      }
      const std::uint64_t idx = word.index();
      if (seen[idx]) {
        throw PreconditionError("StochasticPauliChannel: duplicate word " +
                                word.str());
      }
      seen[idx] = true;
      probs[idx] = p;
      if (idx != 0) others += p;
    }
    if (!seen[0]) {
      if (!infer_identity) {
        throw PreconditionError("StochasticPauliChannel: identity missing");
      }
      probs[0] = 1.0 - others;
    }
    return StochasticPauliChannel(arity, std::move(probs));
  }

  unsigned arity() const { return arity_; }
  std::span<const double> probabilities() const { return probs_; }
  double probability(std::uint64_t index) const { return probs_.at(index); }
  double probability(const PauliString& p) const {
    if (p.size() != arity_) throw PreconditionError("arity mismatch");
    return probs_[p.index()];
  }

  /// Total error weight eps = 1 - p_I.
  double error_probability() const {
    double s = 0.0;
    for (std::size_t i = 1; i < probs_.size(); ++i) s += probs_[i];
    return s;
  }

  bool is_identity() const { return probs_[0] == 1.0; }

  /// Pauli index drawn by inverse-CDF lookup of a uniform u in [0, 1).
  std::uint64_t sample(double u) const {
    if (cdf_.empty()) return 0;
    const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
    const auto pos = static_cast<std::size_t>(it - cdf_.begin());
    return pos < support_.size() ? support_[pos] : support_.back();
  }

  /// Every non-identity probability multiplied by `factor`, identity
  /// adjusted to keep the sum at 1.
  StochasticPauliChannel scaled(double factor) const {
    if (factor == 1.0) return *this;
    if (!(factor >= 0.0)) {
      throw PreconditionError("scaled: factor must be non-negative");
    }
    const double mass = error_probability() * factor;
    if (mass >= 1.0) {
      throw PreconditionError("scaled: scaled error mass " +
                              std::to_string(mass) + " >= 1");
    }
    std::vector<double> probs(probs_.size());
    for (std::size_t i = 1; i < probs.size(); ++i) probs[i] = probs_[i] * factor;
    probs[0] = 1.0 - mass;
    return StochasticPauliChannel(arity_, std::move(probs));
  }

  PauliMixture as_mixture() const { return PauliMixture(arity_, probs_); }

  friend bool operator==(const StochasticPauliChannel& a,
                         const StochasticPauliChannel& b) {
    return a.arity_ == b.arity_ && a.probs_ == b.probs_;
  }

 private:
  void build_cdf() {
    cdf_.clear();
    support_.clear();
    double acc = 0.0;
    for (std::size_t i = 0; i < probs_.size(); ++i) {
      if (probs_[i] == 0.0) continue;
      acc += probs_[i];
      cdf_.push_back(acc);
      support_.push_back(i);
    }
  }

  unsigned arity_ = 1;
  std::vector<double> probs_;
  std::vector<double> cdf_;
  std::vector<std::uint64_t> support_;
};

inline PtmDiagonal ptm_diagonal(const PauliMixture& map) {
  return PtmDiagonal{map.arity(), detail::sign_transform(map.weights(), map.arity())};
}

/// PTM eigenvalue for word Q is sum_P p_P s(P, Q).
inline PtmDiagonal ptm_diagonal(const StochasticPauliChannel& channel) {
  PtmDiagonal out{channel.arity(),
                  detail::sign_transform(channel.probabilities(), channel.arity())};
  out.entries[0] = 1.0;
  return out;
}

/// Recovers conjugation weights from PTM eigenvalues (inverse of the sign
/// transform, which is its own inverse up to a factor 4^n).
inline PauliMixture mixture_from_ptm(const PtmDiagonal& ptm) {
  std::vector<double> w = detail::sign_transform(ptm.entries, ptm.arity);
  const double scale = 1.0 / static_cast<double>(pauli_count(ptm.arity));
  for (double& x : w) x *= scale;
  return PauliMixture(ptm.arity, std::move(w));
}

/// Uniform local depolarizing channel with total error probability `eps`.
inline StochasticPauliChannel depolarizing_channel(unsigned arity, double eps) {
  detail::check_arity(arity, "depolarizing_channel");
  if (!(eps >= 0.0 && eps < 1.0)) {
    throw PreconditionError("depolarizing_channel: eps must lie in [0, 1)");
  }
  const std::uint64_t count = pauli_count(arity);
  std::vector<double> probs(count, eps / static_cast<double>(count - 1));
  probs[0] = 1.0 - eps;
  return StochasticPauliChannel(arity, std::move(probs));
}

struct QuasiTerm {
  double coefficient = 0.0;
  PauliString pauli;
};

/// Inverse channel in the form (1 + eps1) I - eps2 E with the inverse
/// generator E = sum_i c_i V_i(.)V_i and sum_i |c_i| = 1.
class QuasiInverseChannel {
 public:
  QuasiInverseChannel(unsigned arity, double eps1, double eps2,
                      std::vector<QuasiTerm> terms)
      : arity_(arity), eps1_(eps1), eps2_(eps2), terms_(std::move(terms)) {
    detail::check_arity(arity, "QuasiInverseChannel");
    if (!(eps2 >= 0.0) || !std::isfinite(eps1) || !std::isfinite(eps2)) {
      throw PreconditionError("QuasiInverseChannel: invalid eps1/eps2");
    }
    if (1.0 + eps1 <= 0.0) {
      throw PreconditionError("QuasiInverseChannel: identity weight must be positive");
    }
    double abs_sum = 0.0, sum = 0.0;
    for (const QuasiTerm& t : terms_) {
      if (t.pauli.size() != arity) {
        throw PreconditionError("QuasiInverseChannel: term arity mismatch");
      }
      abs_sum += std::abs(t.coefficient);
      sum += t.coefficient;
    }
    if (!terms_.empty() && std::abs(abs_sum - 1.0) > 1e-12) {
      throw PreconditionError("QuasiInverseChannel: sum |c_i| must be 1");
    }
    if (terms_.empty() && eps2 != 0.0) {
      throw PreconditionError("QuasiInverseChannel: eps2 > 0 needs terms");
    }
    if (std::abs((1.0 + eps1) - eps2 * sum - 1.0) > 1e-12) {
      throw PreconditionError(
          "QuasiInverseChannel: identity PTM entry must equal 1");
    }
    double acc = 0.0;
    for (const QuasiTerm& t : terms_) {
      acc += std::abs(t.coefficient);
      cdf_.push_back(acc);
    }
  }

  static QuasiInverseChannel identity(unsigned arity) {
    return QuasiInverseChannel(arity, 0.0, 0.0, {});
  }

  unsigned arity() const { return arity_; }
  double eps1() const { return eps1_; }
  double eps2() const { return eps2_; }
  const std::vector<QuasiTerm>& terms() const { return terms_; }

  /// Per-gate quasi-probability norm 1 + eps1 + eps2.
  double overhead() const { return 1.0 + eps1_ + eps2_; }

  /// Term index drawn with probability |c_i| from a uniform u in [0, 1).
  std::size_t sample_term(double u) const {
    const double target = u * cdf_.back();
    const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), target);
    const auto pos = static_cast<std::size_t>(it - cdf_.begin());
    return std::min(pos, terms_.size() - 1);
  }

  /// The full signed map (1 + eps1) I - eps2 E.
  PauliMixture as_mixture() const {
    std::vector<double> w(pauli_count(arity_), 0.0);
    w[0] = 1.0 + eps1_;
    for (const QuasiTerm& t : terms_) w[t.pauli.index()] -= eps2_ * t.coefficient;
    return PauliMixture(arity_, std::move(w));
  }

  /// The inverse generator E alone.
  PauliMixture generator() const {
    std::vector<double> w(pauli_count(arity_), 0.0);
    for (const QuasiTerm& t : terms_) w[t.pauli.index()] += t.coefficient;
    return PauliMixture(arity_, std::move(w));
  }

 private:
  unsigned arity_;
  double eps1_;
  double eps2_;
  std::vector<QuasiTerm> terms_;
  std::vector<double> cdf_;
};

/// Inverts a stochastic Pauli channel through its PTM diagonal and splits
/// the inverse into identity and inverse-generator parts. Terms of
/// magnitude below 1e-14 are dropped as rounding noise.
inline QuasiInverseChannel invert_channel(const StochasticPauliChannel& channel) {
  const unsigned arity = channel.arity();
  PtmDiagonal ptm = ptm_diagonal(channel);
  for (std::size_t q = 0; q < ptm.entries.size(); ++q) {
    if (std::abs(ptm.entries[q]) < kSingularThreshold) {
      throw NonInvertibleChannelError(
          "invert_channel: PTM entry for " +
          PauliString::from_index(arity, q).str() + " is singular");
    }
    ptm.entries[q] = 1.0 / ptm.entries[q];
  }
  const PauliMixture inverse = mixture_from_ptm(ptm);
  const auto w = inverse.weights();
  double eps2 = 0.0;
  for (std::size_t p = 1; p < w.size(); ++p) {
    if (std::abs(w[p]) > 1e-14) eps2 += std::abs(w[p]);
  }
  std::vector<QuasiTerm> terms;
  if (eps2 > 0.0) {
    for (std::size_t p = 1; p < w.size(); ++p) {
      if (std::abs(w[p]) > 1e-14) {
        terms.push_back({-w[p] / eps2, PauliString::from_index(arity, p)});
      }
    }
  }
  return QuasiInverseChannel(arity, w[0] - 1.0, eps2, std::move(terms));
}

/// Inverse of a uniform depolarizing channel written in replacement form:
/// with the channel viewed as (1 - p) I + p D, where D replaces the state by
/// the maximally mixed one, the inverse is (1 + eps) I - eps D with
/// eps = p / (1 - p), and D = 4^-n sum_P P(.)P includes the identity word.
/// Throws unless every non-identity probability is equal.
inline QuasiInverseChannel replacement_inverse(const StochasticPauliChannel& channel) {
  const unsigned arity = channel.arity();
  const auto probs = channel.probabilities();
  const double first = probs[1];
  for (std::size_t i = 2; i < probs.size(); ++i) {
    if (std::abs(probs[i] - first) > kProbabilityTolerance) {
      throw PreconditionError("replacement_inverse: channel is not uniform depolarizing");
    }
  }
  const double d2 = static_cast<double>(pauli_count(arity));
  const double replace = channel.error_probability() * d2 / (d2 - 1.0);
  if (replace >= 1.0 - kSingularThreshold) {
    throw NonInvertibleChannelError("replacement_inverse: channel fully depolarizes");
  }
  if (replace == 0.0) return QuasiInverseChannel::identity(arity);
  const double eps = replace / (1.0 - replace);
  std::vector<QuasiTerm> terms;
  terms.reserve(static_cast<std::size_t>(d2));
  for (std::uint64_t p = 0; p < pauli_count(arity); ++p) {
    terms.push_back({1.0 / d2, PauliString::from_index(arity, p)});
  }
  return QuasiInverseChannel(arity, eps, eps, std::move(terms));
}

}  // namespace fpec
