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

// Exact (sampling-free) references for the mitigation estimators. All of
// these evolve density matrices or transfer matrices and are meant for small
// registers.

#include <cmath>
#include <cstdint>
#include <numeric>
#include <vector>

#include "fpec/channel.hpp"
#include "fpec/circuit.hpp"
#include "fpec/errors.hpp"
#include "fpec/fpec.hpp"
#include "fpec/gamma.hpp"
#include "fpec/observable.hpp"
#include "fpec/simulator.hpp"

namespace fpec {

inline double binomial(std::size_t n, std::size_t k) {
  if (k > n) return 0.0;
  k = std::min(k, n - k);
  double c = 1.0;
  for (std::size_t j = 1; j <= k; ++j) c = c * static_cast<double>(n - k + j) / static_cast<double>(j);
  return c < 0x1p53 ? std::round(c) : c;
}

/// Exact <O>_k for k = 0..K, each averaged over every k-subset of sites.
///
/// Tracks D_j = sum over j-subsets of the partially evolved circuit; at a
/// site D_j <- Lambda(D_j) + E(Lambda(D_{j-1})). Cost is (K + 1) density
/// matrices instead of enumerating C(l, k) subsets.
inline std::vector<double> exact_order_expectations(const Circuit& circuit,
                                                    const QuasiInverseChannel& quasi,
                                                    std::size_t K,
                                                    const DiagonalObservable& obs) {
  const std::size_t l = circuit.num_sites();
  if (K > l) throw PreconditionError("exact_order_expectations: K exceeds site count");
  if (circuit.num_qubits() > kDensityMatrixMaxQubits) {
    throw PreconditionError("exact_order_expectations: register too large");
  }
  detail::check_quasi_matches(circuit, quasi);
  const PauliMixture generator = quasi.generator();
  std::vector<DensityMatrix> orders;
  orders.reserve(K + 1);
  orders.push_back(initial_density_matrix(circuit));
  for (std::size_t j = 1; j <= K; ++j) {
    orders.emplace_back(circuit.num_qubits());
    orders.back().set_zero();
  }
  std::size_t sites_seen = 0;
  const auto& gates = circuit.gates();
  for (std::size_t g = 0; g < gates.size(); ++g) {
    const std::size_t live = std::min(K, sites_seen) + 1;
    for (std::size_t j = 0; j < live; ++j) apply_gate(orders[j], gates[g]);
    const auto site = circuit.site_at_gate(g);
    if (!site) continue;
    const auto& channel = circuit.site_channel(*site);
    if (!channel.is_identity()) {
      const PauliMixture noise = channel.as_mixture();
      for (std::size_t j = 0; j < live; ++j) orders[j].apply_mixture(noise, gates[g].qubits);
    }
    for (std::size_t j = std::min(K, sites_seen + 1); j >= 1; --j) {
      DensityMatrix injected = orders[j - 1];
      injected.apply_mixture(generator, gates[g].qubits);
      orders[j].add_scaled(injected, 1.0);
    }
    ++sites_seen;
  }
  std::vector<double> out(K + 1);
  for (std::size_t k = 0; k <= K; ++k) out[k] = expectation(orders[k], obs) / binomial(l, k);
  return out;
}

/// Exact value of the truncated estimator sum_{k<=K} gamma_k <O>_k.
inline double exact_fpec_value(const Circuit& circuit, const QuasiInverseChannel& quasi,
                               std::size_t K, const DiagonalObservable& obs) {
  const GammaSeries series = gamma_series(quasi.eps1(), quasi.eps2(), circuit.num_sites());
  const auto values = exact_order_expectations(circuit, quasi, K, obs);
  double acc = 0.0;
  for (std::size_t k = 0; k <= K; ++k) acc += series.gamma(k) * values[k];
  return acc;
}

namespace detail {
/// Calls fn(subset) for every k-subset of [0, n) in lexicographic order.
template <class Fn>
void for_each_subset(std::size_t n, std::size_t k, Fn&& fn) {
  std::vector<std::size_t> idx(k);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  while (true) {
    fn(static_cast<const std::vector<std::size_t>&>(idx));
    std::size_t pos = k;
    while (pos > 0 && idx[pos - 1] == n - k + pos - 1) --pos;
    if (pos == 0) return;
    ++idx[pos - 1];
    for (std::size_t j = pos; j < k; ++j) idx[j] = idx[j - 1] + 1;
  }
}

inline std::vector<SiteMap> generator_maps(const std::vector<std::size_t>& subset,
                                           const PauliMixture& generator) {
  std::vector<SiteMap> maps;
  maps.reserve(subset.size());
  for (std::size_t s : subset) maps.push_back({s, generator});
  return maps;
}
}  // namespace detail

/// <O>_k by explicit enumeration of all C(l, k) injection sets.
inline double enumerate_order_expectation(const Circuit& circuit, const QuasiInverseChannel& quasi,
                                          std::size_t k, const DiagonalObservable& obs,
                                          ExactMode mode = ExactMode::DensityMatrix) {
  const std::size_t l = circuit.num_sites();
  if (k > l) throw PreconditionError("enumerate_order_expectation: k exceeds site count");
  if (binomial(l, k) > 1e6) throw PreconditionError("enumerate_order_expectation: too many subsets");
  detail::check_quasi_matches(circuit, quasi);
  const PauliMixture generator = quasi.generator();
  double acc = 0.0;
  std::size_t count = 0;
  detail::for_each_subset(l, k, [&](const std::vector<std::size_t>& subset) {
    const auto maps = detail::generator_maps(subset, generator);
    acc += exact_expectation(circuit, std::span<const SiteMap>(maps), obs, mode);
    ++count;
  });
  return acc / static_cast<double>(count);
}

/// C_k as a transfer matrix: average of the circuit PTM over all k-subsets
/// with the inverse generator injected after those sites.
inline RealMatrix order_superoperator(const Circuit& circuit, const QuasiInverseChannel& quasi,
                                      std::size_t k) {
  const std::size_t l = circuit.num_sites();
  if (k > l) throw PreconditionError("order_superoperator: k exceeds site count");
  detail::check_quasi_matches(circuit, quasi);
  const PauliMixture generator = quasi.generator();
  const std::size_t count = pauli_count(circuit.num_qubits());
  RealMatrix acc = RealMatrix::Zero(count, count);
  std::size_t subsets = 0;
  detail::for_each_subset(l, k, [&](const std::vector<std::size_t>& subset) {
    const auto maps = detail::generator_maps(subset, generator);
    acc += circuit_ptm(circuit, maps);
    ++subsets;
  });
  return acc / static_cast<double>(subsets);
}

/// sum_{k=0}^{l} gamma_k C_k; equals the ideal circuit's PTM.
inline RealMatrix binomial_expansion_superoperator(const Circuit& circuit,
                                                   const QuasiInverseChannel& quasi) {
  const std::size_t l = circuit.num_sites();
  const GammaSeries series = gamma_series(quasi.eps1(), quasi.eps2(), l);
  const std::size_t count = pauli_count(circuit.num_qubits());
  RealMatrix acc = RealMatrix::Zero(count, count);
  for (std::size_t k = 0; k <= std::min(l, series.max_order()); ++k) {
    acc += series.gamma(k) * order_superoperator(circuit, quasi, k);
  }
  return acc;
}

/// Expectation of the standard PEC estimator obtained by enumerating every
/// quasi-sampling branch: per site either nothing (weight 1 + eps1) or term
/// V_i (weight -eps2 c_i).
inline double pec_branch_enumeration(const Circuit& circuit, const QuasiInverseChannel& quasi,
                                     const DiagonalObservable& obs) {
  detail::check_quasi_matches(circuit, quasi);
  const std::size_t l = circuit.num_sites();
  const std::size_t choices = quasi.terms().size() + 1;
  if (std::pow(static_cast<double>(choices), static_cast<double>(l)) > 4e6) {
    throw PreconditionError("pec_branch_enumeration: too many branches");
  }
  std::vector<std::size_t> branch(l, 0);
  double acc = 0.0;
  while (true) {
    double weight = 1.0;
    std::vector<Injection> injections;
    for (std::size_t s = 0; s < l; ++s) {
      if (branch[s] == 0) {
        weight *= 1.0 + quasi.eps1();
      } else {
        const QuasiTerm& t = quasi.terms()[branch[s] - 1];
        weight *= -quasi.eps2() * t.coefficient;
        injections.push_back({s, t.pauli});
      }
    }
    if (weight != 0.0) {
      acc += weight * exact_expectation(circuit, std::span<const Injection>(injections), obs);
    }
    std::size_t pos = 0;
    while (pos < l && ++branch[pos] == choices) branch[pos++] = 0;
    if (pos == l) break;
  }
  return acc;
}

}  // namespace fpec
