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

#include <cstdint>
#include <numeric>
#include <vector>

#include "fpec/channel.hpp"
#include "fpec/circuit.hpp"
#include "fpec/errors.hpp"
#include "fpec/gamma.hpp"
#include "fpec/observable.hpp"
#include "fpec/report.hpp"
#include "fpec/rng.hpp"
#include "fpec/simulator.hpp"

namespace fpec {

namespace detail {
inline void check_quasi_matches(const Circuit& circuit, const QuasiInverseChannel& quasi) {
  for (std::size_t s = 0; s < circuit.num_sites(); ++s) {
    if (circuit.site_support(s).size() != quasi.arity()) {
      throw PreconditionError("inverse channel arity " + std::to_string(quasi.arity()) +
                              " does not match noise site " + std::to_string(s));
    }
  }
}
}  // namespace detail

/// Sample estimate of <O>_k: each shot injects inverse-generator terms at k
/// distinct noise sites chosen uniformly (partial Fisher-Yates), term i with
/// probability |c_i|, and records the product of sign(c_i) times O.
///
/// Shot i draws only from rng.substream(i).
inline SampleStats estimate_order_k(const Circuit& circuit, const QuasiInverseChannel& quasi,
                                    std::size_t k, std::uint64_t shots,
                                    const DiagonalObservable& obs, const RngStream& rng,
                                    unsigned threads = 1) {
  const std::size_t l = circuit.num_sites();
  if (k > l) {
    throw PreconditionError("estimate_order_k: order " + std::to_string(k) +
                            " exceeds the " + std::to_string(l) + " noise sites");
  }
  if (shots == 0) throw PreconditionError("estimate_order_k: need at least one shot");
  if (k > 0 && quasi.terms().empty()) {
    throw PreconditionError("estimate_order_k: inverse generator has no terms");
  }
  detail::check_quasi_matches(circuit, quasi);
  obs.check_size(circuit.num_qubits());
  const auto& terms = quasi.terms();
  const auto values = collect_shots(shots, threads, [&](std::size_t shot) {
    RngStream r = rng.substream(shot);
    std::vector<Injection> injections;
    double sign = 1.0;
    if (k > 0) {
      std::vector<std::size_t> sites(l);
      std::iota(sites.begin(), sites.end(), std::size_t{0});
      injections.reserve(k);
      for (std::size_t j = 0; j < k; ++j) {
        std::swap(sites[j], sites[j + r.below(l - j)]);
      }
      for (std::size_t j = 0; j < k; ++j) {
        const QuasiTerm& t = terms[quasi.sample_term(r.uniform())];
        if (t.coefficient < 0.0) sign = -sign;
        injections.push_back({sites[j], t.pauli});
      }
    }
    return sign * obs.evaluate(run_trajectory(circuit, injections, r));
  });
  return sample_stats(values);
}

/// Binomial-expansion PEC: pick K by `policy`, split M shots over orders
/// 0..K by |gamma_k|, and combine sum_k gamma_k <O>_k.
///
/// Order k draws from rng.substream(k).
inline EstimatorReport fpec_estimate(const Circuit& circuit, const QuasiInverseChannel& quasi,
                                     std::uint64_t shots, const TruncationPolicy& policy,
                                     const DiagonalObservable& obs, const RngStream& rng,
                                     unsigned threads = 1) {
  detail::check_quasi_matches(circuit, quasi);
  const GammaSeries series = gamma_series(quasi.eps1(), quasi.eps2(), circuit.num_sites());
  const std::size_t K = choose_truncation(series, policy, shots, obs.norm());
  const ShotPlan plan = allocate_shots(series, K, shots);

  EstimatorReport report;
  report.method = Method::Fpec;
  report.K = K;
  report.shots = shots;
  report.bias_bound = obs.norm() * series.tail(K);
  double var_sum = 0.0;
  for (std::size_t k = 0; k <= K; ++k) {
    const SampleStats s =
        estimate_order_k(circuit, quasi, k, plan.shots[k], obs, rng.substream(k), threads);
    const double g = series.gamma(k);
    report.per_k.push_back({k, g, plan.shots[k], s.mean, s.variance});
    report.mean += g * s.mean;
    var_sum += g * g * s.variance / static_cast<double>(plan.shots[k]);
  }
  if (plan.shots[0] >= 2) report.std_error = std::sqrt(var_sum);
  return report;
}

}  // namespace fpec
