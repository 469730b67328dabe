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
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "fpec/errors.hpp"

namespace fpec {

/// Orders whose |gamma_k| / |gamma_0| falls to this ratio are not stored.
inline constexpr double kGammaRelativeCutoff = 1e-30;

namespace detail {

/// log(sum_i exp(v_i)) over a range; -inf for an empty range.
inline double log_sum_exp(std::span<const double> logs) {
  double peak = -std::numeric_limits<double>::infinity();
  for (double v : logs) peak = std::max(peak, v);
  if (!std::isfinite(peak)) return peak;
  double acc = 0.0;
  for (double v : logs) acc += std::exp(v - peak);
  return peak + std::log(acc);
}

}  // namespace detail

/// Binomial weights gamma_k = C(l, k) (1 + eps1)^(l - k) (-eps2)^k of the
/// order-k noisy circuit classes, held as log-magnitudes with sign (-1)^k.
///
/// Orders are stored up to the first k whose magnitude drops below
/// kGammaRelativeCutoff * |gamma_0| (or up to l). The full 1-norm
/// sum_{k=0}^{l} |gamma_k| = (1 + eps1 + eps2)^l is kept in closed form.
class GammaSeries {
 public:
  GammaSeries(double eps1, double eps2, std::size_t sites)
      : eps1_(eps1), eps2_(eps2), sites_(sites) {
    if (!(eps2 >= 0.0) || !(1.0 + eps1 > 0.0) || !std::isfinite(eps1) || !std::isfinite(eps2)) {
      throw PreconditionError("gamma_series: need eps2 >= 0 and 1 + eps1 > 0");
    }
    const double log_id = std::log1p(eps1);
    const double log_err = eps2 > 0.0 ? std::log(eps2) : -std::numeric_limits<double>::infinity();
    const double floor = std::log(kGammaRelativeCutoff);
    double log_binom = 0.0;
    log_abs_.push_back(static_cast<double>(sites) * log_id);
    for (std::size_t k = 1; k <= sites && eps2 > 0.0; ++k) {
      log_binom += std::log(static_cast<double>(sites - k + 1)) - std::log(static_cast<double>(k));
      const double v = log_binom + static_cast<double>(sites - k) * log_id +
                       static_cast<double>(k) * log_err;
      if (v - log_abs_[0] <= floor) break;
      log_abs_.push_back(v);
    }
    log_total_ = static_cast<double>(sites) * std::log1p(eps1 + eps2);
  }

  double eps1() const { return eps1_; }
  double eps2() const { return eps2_; }
  std::size_t sites() const { return sites_; }

  /// Largest stored order.
  std::size_t max_order() const { return log_abs_.size() - 1; }

  double log_abs_gamma(std::size_t k) const {
    return k <= max_order() ? log_abs_[k] : -std::numeric_limits<double>::infinity();
  }
  double abs_gamma(std::size_t k) const { return std::exp(log_abs_gamma(k)); }

  /// log |gamma_k| from the closed form for any k <= l, ignoring the
  /// storage cutoff.
  double log_abs_gamma_unbounded(std::size_t k) const {
    if (k > sites_) return -std::numeric_limits<double>::infinity();
    if (k <= max_order()) return log_abs_[k];
    if (eps2_ == 0.0) return -std::numeric_limits<double>::infinity();
    double log_binom = 0.0;
    for (std::size_t j = 1; j <= k; ++j) {
      log_binom += std::log(static_cast<double>(sites_ - j + 1)) - std::log(static_cast<double>(j));
    }
    return log_binom + static_cast<double>(sites_ - k) * std::log1p(eps1_) +
           static_cast<double>(k) * std::log(eps2_);
  }
  double gamma(std::size_t k) const { return (k % 2 ? -1.0 : 1.0) * abs_gamma(k); }
  std::span<const double> log_abs() const { return log_abs_; }

  /// log of the full norm, l log(1 + eps1 + eps2).
  double log_total_norm() const { return log_total_; }
  double total_norm() const { return std::exp(log_total_); }

  /// log sum_{k<=K} |gamma_k|
  double log_head(std::size_t K) const {
    const std::size_t end = std::min(K, max_order()) + 1;
    return detail::log_sum_exp(std::span<const double>(log_abs_).first(end));
  }
  double head(std::size_t K) const { return std::exp(log_head(K)); }

  /// log sum_{k>K} |gamma_k| over stored orders (the unstored remainder is
  /// below kGammaRelativeCutoff * |gamma_0| per order).
  double log_tail(std::size_t K) const {
    if (K >= max_order()) return -std::numeric_limits<double>::infinity();
    return detail::log_sum_exp(std::span<const double>(log_abs_).subspan(K + 1));
  }
  double tail(std::size_t K) const { return std::exp(log_tail(K)); }

 private:
  double eps1_;
  double eps2_;
  std::size_t sites_;
  std::vector<double> log_abs_;
  double log_total_ = 0.0;
};

inline GammaSeries gamma_series(double eps1, double eps2, std::size_t sites) {
  return GammaSeries(eps1, eps2, sites);
}

/// Largest K such that every order k <= K receives at least one shot when M
/// shots are split against the full norm, M |gamma_k| / sum_{j<=l} |gamma_j|.
/// The first unresolvable order ends the series.
inline std::size_t truncate_by_shots(const GammaSeries& series, std::uint64_t shots) {
  if (shots == 0) throw PreconditionError("truncate_by_shots: need at least one shot");
  const double log_m = std::log(static_cast<double>(shots));
  const double log_norm = series.log_total_norm();
  if (log_m + series.log_abs_gamma(0) - log_norm < 0.0) {
    throw PreconditionError("truncate_by_shots: shot budget " + std::to_string(shots) +
                            " cannot resolve order 0");
  }
  std::size_t K = 0;
  while (K < series.max_order() &&
         log_m + series.log_abs_gamma(K + 1) - log_norm >= 0.0) {
    ++K;
  }
  return K;
}

/// Smallest K with obs_norm * sum_{k>K} |gamma_k| <= delta.
inline std::size_t truncate_by_bias(const GammaSeries& series, double delta, double obs_norm = 1.0) {
  if (!(delta > 0.0)) throw PreconditionError("truncate_by_bias: delta must be positive");
  if (!(obs_norm >= 0.0)) throw PreconditionError("truncate_by_bias: negative norm");
  // Suffix sums from the top keep each tail accurate however small it is.
  const std::size_t top = series.max_order();
  std::vector<double> tail(top + 1, 0.0);
  for (std::size_t k = top; k-- > 0;) tail[k] = tail[k + 1] + series.abs_gamma(k + 1);
  for (std::size_t K = 0; K <= top; ++K) {
    if (obs_norm * tail[K] <= delta) return K;
  }
  return top;
}

struct TruncationPolicy {
  enum class Kind { ShotLimited, BiasTolerance, FixedOrder };
  Kind kind = Kind::ShotLimited;
  double delta = 0.0;
  std::size_t order = 0;  // FixedOrder only

  static TruncationPolicy shot_limited() { return {Kind::ShotLimited, 0.0, 0}; }
  static TruncationPolicy bias_tolerance(double delta) { return {Kind::BiasTolerance, delta, 0}; }
  static TruncationPolicy fixed_order(std::size_t K) { return {Kind::FixedOrder, 0.0, K}; }
};

/// K selected by `policy`; a fixed order is clamped to the stored series.
inline std::size_t choose_truncation(const GammaSeries& series, const TruncationPolicy& policy,
                                     std::uint64_t shots, double obs_norm = 1.0) {
  switch (policy.kind) {
    case TruncationPolicy::Kind::ShotLimited: return truncate_by_shots(series, shots);
    case TruncationPolicy::Kind::BiasTolerance: return truncate_by_bias(series, policy.delta, obs_norm);
    default: return std::min(policy.order, series.max_order());
  }
}

/// Deterministic per-order shot counts m_0..m_K.
struct ShotPlan {
  std::size_t K = 0;
  std::vector<std::uint64_t> shots;
  std::uint64_t total = 0;
};

/// m_k proportional to |gamma_k| / sum_{j<=K} |gamma_j|, rounded by largest
/// remainder (ties to lower k) with every m_k >= 1 and sum m_k = M.
inline ShotPlan allocate_shots(const GammaSeries& series, std::size_t K, std::uint64_t total) {
  if (K > series.max_order()) {
    throw PreconditionError("allocate_shots: K exceeds the stored series");
  }
  if (total < K + 1) {
    throw PreconditionError("allocate_shots: " + std::to_string(total) +
                            " shots cannot cover " + std::to_string(K + 1) + " orders");
  }
  const double log_head = series.log_head(K);
  std::vector<double> quota(K + 1);
  std::vector<std::uint64_t> m(K + 1);
  std::uint64_t assigned = 0;
  for (std::size_t k = 0; k <= K; ++k) {
    quota[k] = static_cast<double>(total) * std::exp(series.log_abs_gamma(k) - log_head);
    m[k] = static_cast<std::uint64_t>(std::floor(quota[k]));
    assigned += m[k];
  }
  // Rounding can overshoot by an ulp-sized quota error; trim from the top.
  while (assigned > total) {
    const auto it = std::max_element(m.begin(), m.end());
    --*it;
    --assigned;
  }
  std::vector<std::size_t> order(K + 1);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return quota[a] - std::floor(quota[a]) > quota[b] - std::floor(quota[b]);
  });
  for (std::size_t i = 0; assigned < total; i = (i + 1) % order.size()) {
    ++m[order[i]];
    ++assigned;
  }
  for (std::size_t k = 0; k <= K; ++k) {
    if (m[k] >= 1) continue;
    const auto donor = std::max_element(m.begin(), m.end());
    --*donor;
    m[k] = 1;
  }
  return ShotPlan{K, std::move(m), total};
}

/// Per-shot variance of the truncated estimator,
/// (sum_{k<=K} |gamma_k|) * sum_{k<=K} |gamma_k| var_k.
inline double estimator_variance(const GammaSeries& series, std::size_t K,
                                 std::span<const double> variances) {
  if (variances.size() < K + 1) {
    throw PreconditionError("estimator_variance: need one variance per order");
  }
  double weighted = 0.0;
  for (std::size_t k = 0; k <= K; ++k) weighted += series.abs_gamma(k) * variances[k];
  return series.head(K) * weighted;
}

}  // namespace fpec
