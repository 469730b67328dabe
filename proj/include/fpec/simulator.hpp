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

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numeric>
#include <span>
#include <vector>

#include "fpec/channel.hpp"
#include "fpec/circuit.hpp"
#include "fpec/density_matrix.hpp"
#include "fpec/errors.hpp"
#include "fpec/kernels.hpp"
#include "fpec/observable.hpp"
#include "fpec/rng.hpp"

namespace fpec {

/// Oracle size limits.
inline constexpr unsigned kSuperoperatorMaxQubits = 2;
inline constexpr std::size_t kSuperoperatorMaxSites = 6;

namespace detail {

/// Register masks of a local Pauli word on `support`.
inline void embed_pauli(std::uint64_t local_x, std::uint64_t local_z,
                        std::span<const unsigned> support, std::uint64_t& x,
                        std::uint64_t& z) {
  x = 0;
  z = 0;
  for (std::size_t t = 0; t < support.size(); ++t) {
    if ((local_x >> t) & 1U) x |= std::uint64_t{1} << support[t];
    if ((local_z >> t) & 1U) z |= std::uint64_t{1} << support[t];
  }
}

inline kernels::Amplitude rzz_phase(double theta, bool odd) {
  return std::polar(1.0, odd ? theta : -theta);
}

}  // namespace detail

/// Pure n-qubit state; qubit q is bit q of the amplitude index.
class StateVector {
 public:
  using Amplitude = kernels::Amplitude;

  explicit StateVector(unsigned num_qubits) : n_(num_qubits) {
    if (num_qubits == 0 || num_qubits > kMaxQubits) {
      throw PreconditionError("StateVector: qubit count must be in [1, " +
                              std::to_string(kMaxQubits) + "]");
    }
    amps_.assign(std::size_t{1} << num_qubits, Amplitude{0.0});
    amps_[0] = 1.0;
  }

  /// Tensor product of Ry(angle_q)|0>.
  static StateVector product_state(std::span<const double> angles) {
    StateVector sv(static_cast<unsigned>(angles.size()));
    for (unsigned q = 0; q < angles.size(); ++q) {
      if (angles[q] != 0.0) kernels::apply_1q(sv.amps_, q, kernels::ry_matrix(angles[q]));
    }
    return sv;
  }

  unsigned num_qubits() const { return n_; }
  std::span<const Amplitude> amplitudes() const { return amps_; }
  std::span<Amplitude> amplitudes() { return amps_; }

  double norm() const {
    double s = 0.0;
    for (const Amplitude& a : amps_) s += std::norm(a);
    return std::sqrt(s);
  }

  void apply(const Gate& gate) {
    for (unsigned q : gate.qubits) {
      if (q >= n_) throw PreconditionError("apply_gate: qubit index out of range");
    }
    switch (gate.kind) {
      case GateKind::Identity:
        break;
      case GateKind::Rx:
        kernels::apply_1q(amps_, gate.qubits[0], kernels::rx_matrix(gate.angle));
        break;
      case GateKind::Ry:
        kernels::apply_1q(amps_, gate.qubits[0], kernels::ry_matrix(gate.angle));
        break;
      case GateKind::Rzz:
        kernels::apply_parity_phase(amps_, gate.qubits[0], gate.qubits[1],
                                    detail::rzz_phase(gate.angle, false),
                                    detail::rzz_phase(gate.angle, true));
        break;
      case GateKind::Pauli:
        apply_pauli(gate.pauli, gate.qubits);
        break;
    }
  }

  /// Applies the Hermitian Pauli word `local` on `support`.
  void apply_pauli(const PauliString& local, std::span<const unsigned> support) {
    std::uint64_t x, z;
    detail::embed_pauli(local.x_mask(), local.z_mask(), support, x, z);
    kernels::apply_pauli(amps_, x, z, kernels::pauli_phase(local.y_count()));
  }

  /// Basis index drawn from |amplitude|^2 by a uniform u in [0, 1).
  std::uint64_t sample(double u) const {
    double total = 0.0;
    for (const Amplitude& a : amps_) total += std::norm(a);
    const double target = u * total;
    double acc = 0.0;
    std::size_t last_nonzero = 0;
    for (std::size_t i = 0; i < amps_.size(); ++i) {
      const double p = std::norm(amps_[i]);
      if (p == 0.0) continue;
      acc += p;
      last_nonzero = i;
      if (target < acc) return i;
    }
    return last_nonzero;
  }

 private:
  unsigned n_;
  std::vector<Amplitude> amps_;
};

/// Value-returning form of StateVector::apply.
inline StateVector apply_gate(StateVector state, const Gate& gate) {
  state.apply(gate);
  return state;
}

/// Extra Pauli word applied at a noise site, after the site's sampled noise.
struct Injection {
  std::size_t site = 0;
  PauliString pauli;
};

namespace detail {
inline std::vector<std::size_t> injection_order(const Circuit& circuit,
                                                std::span<const Injection> injections) {
  for (const Injection& inj : injections) {
    if (inj.site >= circuit.num_sites()) {
      throw PreconditionError("injection: site " + std::to_string(inj.site) +
                              " is not a noise site");
    }
    if (inj.pauli.size() != circuit.site_support(inj.site).size()) {
      throw PreconditionError("injection: Pauli word does not match site support");
    }
  }
  std::vector<std::size_t> order(injections.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return injections[a].site < injections[b].site;
  });
  return order;
}
}  // namespace detail

/// One noisy shot: at each noise site a Pauli is drawn from the site channel
/// and applied, then any injections for that site in list order; finally a
/// Z-basis measurement is sampled.
inline Bitstring run_trajectory(const Circuit& circuit, std::span<const Injection> injections,
                                RngStream& rng) {
  const auto order = detail::injection_order(circuit, injections);
  StateVector sv = StateVector::product_state(circuit.initial_angles());
  const auto& gates = circuit.gates();
  std::size_t next = 0;
  for (std::size_t g = 0; g < gates.size(); ++g) {
    sv.apply(gates[g]);
    const auto site = circuit.site_at_gate(g);
    if (!site) continue;
    const StochasticPauliChannel& channel = circuit.site_channel(*site);
    const std::uint64_t err = channel.sample(rng.uniform());
    if (err != 0) sv.apply_pauli(PauliString::from_index(channel.arity(), err), gates[g].qubits);
    while (next < order.size() && injections[order[next]].site == *site) {
      sv.apply_pauli(injections[order[next]].pauli, gates[g].qubits);
      ++next;
    }
  }
  return Bitstring{sv.sample(rng.uniform()), circuit.num_qubits()};
}

inline Bitstring run_trajectory(const Circuit& circuit, RngStream& rng) {
  return run_trajectory(circuit, std::span<const Injection>{}, rng);
}

// ---------------------------------------------------------------------------
// Exact oracles

enum class ExactMode { DensityMatrix, Superoperator };

/// Signed Pauli map applied at a noise site after the site's channel.
struct SiteMap {
  std::size_t site = 0;
  PauliMixture map;
};

inline std::vector<SiteMap> injections_as_site_maps(std::span<const Injection> injections) {
  std::vector<SiteMap> maps;
  maps.reserve(injections.size());
  for (const Injection& inj : injections) maps.push_back({inj.site, PauliMixture::single(inj.pauli)});
  return maps;
}

inline DensityMatrix initial_density_matrix(const Circuit& circuit) {
  const StateVector psi = StateVector::product_state(circuit.initial_angles());
  return DensityMatrix::from_pure(psi.amplitudes());
}

inline void apply_gate(DensityMatrix& rho, const Gate& gate) {
  switch (gate.kind) {
    case GateKind::Identity:
      break;
    case GateKind::Rx:
      rho.apply_1q(gate.qubits[0], kernels::rx_matrix(gate.angle));
      break;
    case GateKind::Ry:
      rho.apply_1q(gate.qubits[0], kernels::ry_matrix(gate.angle));
      break;
    case GateKind::Rzz:
      rho.apply_parity_phase(gate.qubits[0], gate.qubits[1],
                             detail::rzz_phase(gate.angle, false),
                             detail::rzz_phase(gate.angle, true));
      break;
    case GateKind::Pauli: {
      std::uint64_t x, z;
      detail::embed_pauli(gate.pauli.x_mask(), gate.pauli.z_mask(), gate.qubits, x, z);
      rho.apply_pauli_conjugation(x, z);
      break;
    }
  }
}

namespace detail {
inline void check_site_maps(const Circuit& circuit, std::span<const SiteMap> maps) {
  for (const SiteMap& m : maps) {
    if (m.site >= circuit.num_sites()) {
      throw PreconditionError("site map: invalid noise site " + std::to_string(m.site));
    }
    if (m.map.arity() != circuit.site_support(m.site).size()) {
      throw PreconditionError("site map: arity does not match site support");
    }
  }
}
}  // namespace detail

/// Exact channel evolution of the circuit density matrix with `maps`
/// applied after their sites' channels (list order within a site).
inline DensityMatrix evolve_density_matrix(const Circuit& circuit,
                                           std::span<const SiteMap> maps) {
  if (circuit.num_qubits() > kDensityMatrixMaxQubits) {
    throw PreconditionError("exact oracle: density-matrix mode limited to " +
                            std::to_string(kDensityMatrixMaxQubits) + " qubits");
  }
  detail::check_site_maps(circuit, maps);
  DensityMatrix rho = initial_density_matrix(circuit);
  const auto& gates = circuit.gates();
  for (std::size_t g = 0; g < gates.size(); ++g) {
    apply_gate(rho, gates[g]);
    const auto site = circuit.site_at_gate(g);
    if (!site) continue;
    const auto& channel = circuit.site_channel(*site);
    if (!channel.is_identity()) rho.apply_mixture(channel.as_mixture(), gates[g].qubits);
    for (const SiteMap& m : maps) {
      if (m.site == *site) rho.apply_mixture(m.map, gates[g].qubits);
    }
  }
  return rho;
}

inline double expectation(const DensityMatrix& rho, const DiagonalObservable& obs) {
  const unsigned n = rho.num_qubits();
  obs.check_size(n);
  return rho.diagonal_expectation([&](std::size_t i) { return obs.evaluate(i, n); });
}

// Superoperator (Pauli transfer matrix) mode, n <= 2.

using RealMatrix = Eigen::MatrixXd;
using ComplexMatrix = Eigen::MatrixXcd;

/// Dense matrix of a register Pauli word (qubit q = bit q).
inline ComplexMatrix pauli_matrix(const PauliString& word) {
  const std::size_t dim = std::size_t{1} << word.size();
  ComplexMatrix m = ComplexMatrix::Zero(dim, dim);
  const auto phase = kernels::pauli_phase(word.y_count());
  for (std::size_t col = 0; col < dim; ++col) {
    const double sign = (std::popcount(col & word.z_mask()) & 1) ? -1.0 : 1.0;
    m(col ^ word.x_mask(), col) = phase * sign;
  }
  return m;
}

inline ComplexMatrix gate_unitary(const Gate& gate, unsigned num_qubits) {
  const std::size_t dim = std::size_t{1} << num_qubits;
  ComplexMatrix u(dim, dim);
  for (std::size_t col = 0; col < dim; ++col) {
    StateVector basis(num_qubits);
    basis.amplitudes()[0] = 0.0;
    basis.amplitudes()[col] = 1.0;
    basis.apply(gate);
    for (std::size_t row = 0; row < dim; ++row) u(row, col) = basis.amplitudes()[row];
  }
  return u;
}

/// R_PQ = Tr[P U Q U^dag] / d in the dense Pauli-index basis.
inline RealMatrix unitary_ptm(const ComplexMatrix& u) {
  const unsigned n = static_cast<unsigned>(std::countr_zero(static_cast<std::size_t>(u.rows())));
  const std::size_t count = pauli_count(n);
  std::vector<ComplexMatrix> paulis;
  paulis.reserve(count);
  for (std::uint64_t p = 0; p < count; ++p) paulis.push_back(pauli_matrix(PauliString::from_index(n, p)));
  RealMatrix r(count, count);
  const double d = static_cast<double>(u.rows());
  for (std::size_t q = 0; q < count; ++q) {
    const ComplexMatrix conj_q = u * paulis[q] * u.adjoint();
    for (std::size_t p = 0; p < count; ++p) r(p, q) = (paulis[p] * conj_q).trace().real() / d;
  }
  return r;
}

/// Diagonal PTM of a local mixture embedded on `support` of an n-qubit register.
inline RealMatrix mixture_ptm(const PauliMixture& map, std::span<const unsigned> support,
                              unsigned num_qubits) {
  const PtmDiagonal local = ptm_diagonal(map);
  const std::size_t count = pauli_count(num_qubits);
  RealMatrix r = RealMatrix::Zero(count, count);
  for (std::uint64_t q = 0; q < count; ++q) {
    std::uint64_t local_index = 0;
    for (std::size_t t = 0; t < support.size(); ++t) {
      local_index |= ((q >> (2 * support[t])) & 3U) << (2 * t);
    }
    r(q, q) = local.entries[local_index];
  }
  return r;
}

/// PTM of the whole circuit (channels and `maps` included), n <= 2.
inline RealMatrix circuit_ptm(const Circuit& circuit, std::span<const SiteMap> maps) {
  const unsigned n = circuit.num_qubits();
  if (n > kSuperoperatorMaxQubits || circuit.num_sites() > kSuperoperatorMaxSites) {
    throw PreconditionError("exact oracle: superoperator mode limited to " +
                            std::to_string(kSuperoperatorMaxQubits) + " qubits and " +
                            std::to_string(kSuperoperatorMaxSites) + " noise sites");
  }
  detail::check_site_maps(circuit, maps);
  const std::size_t count = pauli_count(n);
  RealMatrix total = RealMatrix::Identity(count, count);
  const auto& gates = circuit.gates();
  for (std::size_t g = 0; g < gates.size(); ++g) {
    total = unitary_ptm(gate_unitary(gates[g], n)) * total;
    const auto site = circuit.site_at_gate(g);
    if (!site) continue;
    total = mixture_ptm(circuit.site_channel(*site).as_mixture(), gates[g].qubits, n) * total;
    for (const SiteMap& m : maps) {
      if (m.site == *site) total = mixture_ptm(m.map, gates[g].qubits, n) * total;
    }
  }
  return total;
}

/// r_Q = Tr[Q rho_0] for the circuit's product initial state.
inline Eigen::VectorXd initial_pauli_vector(const Circuit& circuit) {
  const unsigned n = circuit.num_qubits();
  const StateVector psi = StateVector::product_state(circuit.initial_angles());
  Eigen::VectorXcd v(psi.amplitudes().size());
  for (std::size_t i = 0; i < psi.amplitudes().size(); ++i) v(i) = psi.amplitudes()[i];
  Eigen::VectorXd r(pauli_count(n));
  for (std::uint64_t q = 0; q < pauli_count(n); ++q) {
    r(q) = (v.adjoint() * pauli_matrix(PauliString::from_index(n, q)) * v)(0).real();
  }
  return r;
}

/// o_P = Tr[O P] / d, so that Tr[O C(rho)] = o . (R r).
inline Eigen::VectorXd observable_pauli_vector(const DiagonalObservable& obs, unsigned n) {
  obs.check_size(n);
  const std::size_t dim = std::size_t{1} << n;
  Eigen::VectorXd o(pauli_count(n));
  for (std::uint64_t p = 0; p < pauli_count(n); ++p) {
    const PauliString word = PauliString::from_index(n, p);
    double acc = 0.0;
    if (word.x_mask() == 0) {
      for (std::size_t i = 0; i < dim; ++i) {
        const double sign = (std::popcount(i & word.z_mask()) & 1) ? -1.0 : 1.0;
        acc += sign * obs.evaluate(i, n);
      }
    }
    o(p) = acc / static_cast<double>(dim);
  }
  return o;
}

/// Exact Tr[O C(rho)] with channels applied exactly (no sampling).
inline double exact_expectation(const Circuit& circuit, std::span<const SiteMap> maps,
                                const DiagonalObservable& obs,
                                ExactMode mode = ExactMode::DensityMatrix) {
  if (mode == ExactMode::Superoperator) {
    const RealMatrix r = circuit_ptm(circuit, maps);
    return observable_pauli_vector(obs, circuit.num_qubits()).dot(r * initial_pauli_vector(circuit));
  }
  return expectation(evolve_density_matrix(circuit, maps), obs);
}

inline double exact_expectation(const Circuit& circuit, std::span<const Injection> injections,
                                const DiagonalObservable& obs,
                                ExactMode mode = ExactMode::DensityMatrix) {
  const auto maps = injections_as_site_maps(injections);
  return exact_expectation(circuit, std::span<const SiteMap>(maps), obs, mode);
}

inline double exact_expectation(const Circuit& circuit, const DiagonalObservable& obs,
                                ExactMode mode = ExactMode::DensityMatrix) {
  return exact_expectation(circuit, std::span<const SiteMap>{}, obs, mode);
}

/// Ideal (noise-free) expectation from the pure state; limited to the
/// density-matrix oracle size so exact columns share one limit.
inline double exact_noiseless_expectation(const Circuit& circuit, const DiagonalObservable& obs) {
  const unsigned n = circuit.num_qubits();
  if (n > kDensityMatrixMaxQubits) {
    throw PreconditionError("exact oracle: limited to " +
                            std::to_string(kDensityMatrixMaxQubits) + " qubits");
  }
  obs.check_size(n);
  StateVector sv = StateVector::product_state(circuit.initial_angles());
  for (const Gate& g : circuit.gates()) sv.apply(g);
  double acc = 0.0;
  const auto amps = sv.amplitudes();
  for (std::size_t i = 0; i < amps.size(); ++i) acc += std::norm(amps[i]) * obs.evaluate(i, n);
  return acc;
}

}  // namespace fpec
