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

// Independent dense-matrix references used by the unit and acceptance
// tests. Nothing here goes through the library's sign tables or kernels.

#include <cmath>
#include <complex>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "fpec/channel.hpp"
#include "fpec/circuit.hpp"
#include "fpec/pauli.hpp"

namespace fpec::testing {

using CMat = Eigen::MatrixXcd;
using RMat = Eigen::MatrixXd;

/// Dense matrix of a Pauli word; qubit 0 is the least significant bit of
/// the basis index, so the Kronecker product runs from the last qubit.
inline CMat dense_pauli(const std::string& word) {
  using C = std::complex<double>;
  CMat out = CMat::Identity(1, 1);
  for (auto it = word.rbegin(); it != word.rend(); ++it) {
    CMat p(2, 2);
    switch (*it) {
      case 'X': p << 0, 1, 1, 0; break;
      case 'Y': p << 0, C(0, -1), C(0, 1), 0; break;
      case 'Z': p << 1, 0, 0, -1; break;
      default: p << 1, 0, 0, 1; break;
    }
    CMat next(out.rows() * 2, out.cols() * 2);
    for (int r = 0; r < out.rows(); ++r)
      for (int c = 0; c < out.cols(); ++c) next.block(2 * r, 2 * c, 2, 2) = out(r, c) * p;
    out = next;
  }
  return out;
}

inline std::vector<std::string> all_words(unsigned n) {
  std::vector<std::string> out;
  for (std::uint64_t i = 0; i < pauli_count(n); ++i) out.push_back(PauliString::from_index(n, i).str());
  return out;
}

/// Full PTM R_ij = Tr[P_i L(P_j)] / d of the map rho -> sum_P w_P P rho P,
/// built from a column-stacked superoperator of Kraus-like terms.
inline RMat kraus_ptm(unsigned n, const std::vector<std::pair<std::string, double>>& terms) {
  const int d = 1 << n;
  CMat super = CMat::Zero(d * d, d * d);
  for (const auto& [word, w] : terms) {
    const CMat p = dense_pauli(word);
    // vec(A rho B) = (B^T kron A) vec(rho); here A = P, B = P^dagger.
    const CMat bt = p.adjoint().transpose();
    CMat kron(d * d, d * d);
    for (int r = 0; r < d; ++r)
      for (int c = 0; c < d; ++c) kron.block(r * d, c * d, d, d) = bt(r, c) * p;
    super += w * kron;
  }
  const auto words = all_words(n);
  RMat ptm(words.size(), words.size());
  for (std::size_t j = 0; j < words.size(); ++j) {
    const CMat pj = dense_pauli(words[j]);
    Eigen::VectorXcd v = super * Eigen::Map<const Eigen::VectorXcd>(pj.data(), d * d);
    const CMat out = Eigen::Map<const CMat>(v.data(), d, d);
    for (std::size_t i = 0; i < words.size(); ++i) {
      ptm(static_cast<int>(i), static_cast<int>(j)) = (dense_pauli(words[i]) * out).trace().real() / d;
    }
  }
  return ptm;
}

inline std::vector<std::pair<std::string, double>> channel_terms(const StochasticPauliChannel& ch) {
  std::vector<std::pair<std::string, double>> out;
  for (std::uint64_t i = 0; i < pauli_count(ch.arity()); ++i) {
    out.emplace_back(PauliString::from_index(ch.arity(), i).str(), ch.probability(i));
  }
  return out;
}

inline std::vector<std::pair<std::string, double>> quasi_terms(const QuasiInverseChannel& q) {
  std::vector<std::pair<std::string, double>> out;
  out.emplace_back(std::string(q.arity(), 'I'), 1.0 + q.eps1());
  for (const QuasiTerm& t : q.terms()) out.emplace_back(t.pauli.str(), -q.eps2() * t.coefficient);
  return out;
}

/// Random stochastic Pauli channel with total error eps spread over a
/// random subset of non-identity words.
inline StochasticPauliChannel random_channel(unsigned n, double eps, std::mt19937_64& gen) {
  const std::uint64_t count = pauli_count(n);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> w(count, 0.0);
  double total = 0.0;
  for (std::uint64_t i = 1; i < count; ++i) {
    if (u(gen) < 0.6 || i == 1 + gen() % (count - 1)) {
      w[i] = u(gen);
      total += w[i];
    }
  }
  if (total == 0.0) {
    w[1] = 1.0;
    total = 1.0;
  }
  std::vector<double> probs(count);
  probs[0] = 1.0 - eps;
  for (std::uint64_t i = 1; i < count; ++i) probs[i] = eps * w[i] / total;
  return StochasticPauliChannel(n, probs);
}

inline CMat embed_1q(const CMat& u, unsigned q, unsigned n) {
  CMat out = CMat::Identity(1, 1);
  for (int j = static_cast<int>(n) - 1; j >= 0; --j) {
    const CMat f = static_cast<unsigned>(j) == q ? u : CMat::Identity(2, 2);
    CMat next(out.rows() * 2, out.cols() * 2);
    for (int r = 0; r < out.rows(); ++r)
      for (int c = 0; c < out.cols(); ++c) next.block(2 * r, 2 * c, 2, 2) = out(r, c) * f;
    out = next;
  }
  return out;
}

/// Reference unitaries written out from the stated angle conventions.
inline CMat reference_unitary(const Gate& g, unsigned n) {
  const double c = std::cos(g.angle / 2), s = std::sin(g.angle / 2);
  CMat u(2, 2);
  using C = std::complex<double>;
  switch (g.kind) {
    case GateKind::Rx:
      u << c, C(0, -s), C(0, -s), c;
      return embed_1q(u, g.qubits[0], n);
    case GateKind::Ry:
      u << c, -s, s, c;
      return embed_1q(u, g.qubits[0], n);
    case GateKind::Rzz: {
      CMat d = CMat::Zero(1 << n, 1 << n);
      for (int i = 0; i < (1 << n); ++i) {
        const bool odd = ((i >> g.qubits[0]) ^ (i >> g.qubits[1])) & 1;
        d(i, i) = std::polar(1.0, odd ? g.angle : -g.angle);
      }
      return d;
    }
    default:
      return CMat::Identity(1 << n, 1 << n);
  }
}


/// PTM of U rho U^dagger from dense Pauli matrices.
inline RMat dense_unitary_ptm(const CMat& u, unsigned n) {
  const auto words = all_words(n);
  const double d = static_cast<double>(1 << n);
  RMat ptm(words.size(), words.size());
  for (std::size_t j = 0; j < words.size(); ++j) {
    const CMat moved = u * dense_pauli(words[j]) * u.adjoint();
    for (std::size_t i = 0; i < words.size(); ++i) {
      ptm(static_cast<int>(i), static_cast<int>(j)) = (dense_pauli(words[i]) * moved).trace().real() / d;
    }
  }
  return ptm;
}

/// Random Rx/Rzz circuit (Ry for one qubit) with `channel` after every
/// entangling gate and random product initial state.
inline Circuit random_circuit_with(unsigned n, std::size_t sites, const StochasticPauliChannel& channel,
                                   std::mt19937_64& gen) {
  std::uniform_real_distribution<double> angle(-3.14159, 3.14159);
  std::vector<double> init(n);
  for (double& a : init) a = angle(gen);
  Circuit c(n, init);
  for (std::size_t s = 0; s < sites; ++s) {
    for (unsigned q = 0; q < n; ++q) c.add_gate(Gate::rx(q, angle(gen)));
    if (channel.arity() == 2) {
      const unsigned a = static_cast<unsigned>(gen() % n);
      const unsigned b = (a + 1 + static_cast<unsigned>(gen() % (n - 1))) % n;
      c.add_noisy_gate(Gate::rzz(a, b, angle(gen)), channel);
    } else {
      c.add_noisy_gate(Gate::ry(static_cast<unsigned>(gen() % n), angle(gen)), channel);
    }
  }
  return c;
}

}  // namespace fpec::testing
