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
#include <bit>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numeric>
#include <span>
#include <vector>

#include "fpec/channel.hpp"
#include "fpec/errors.hpp"
#include "fpec/kernels.hpp"

namespace fpec {

/// Maximum register for dense density-matrix evolution (4^12 amplitudes).
inline constexpr unsigned kDensityMatrixMaxQubits = 12;

/// Dense density matrix stored row-major; entry (r, c) lives at flat index
/// (r << n) | c, so the buffer is a 2n-qubit vector whose high half indexes
/// rows. U rho U^dag is U on the row bits and conj(U) on the column bits.
class DensityMatrix {
 public:
  using Amplitude = kernels::Amplitude;

  /// |0...0><0...0|
  explicit DensityMatrix(unsigned num_qubits) : n_(num_qubits) {
    if (num_qubits == 0 || num_qubits > kDensityMatrixMaxQubits) {
      throw PreconditionError("DensityMatrix: qubit count must be in [1, " +
                              std::to_string(kDensityMatrixMaxQubits) + "]");
    }
    data_.assign(std::size_t{1} << (2 * n_), Amplitude{0.0});
    data_[0] = 1.0;
  }

  static DensityMatrix from_pure(std::span<const Amplitude> psi) {
    const unsigned n = static_cast<unsigned>(std::countr_zero(psi.size()));
    if (psi.size() != (std::size_t{1} << n)) {
      throw PreconditionError("DensityMatrix: state size must be a power of two");
    }
    DensityMatrix out(n);
    const std::size_t dim = psi.size();
    for (std::size_t r = 0; r < dim; ++r) {
      for (std::size_t c = 0; c < dim; ++c) {
        out.data_[(r << n) | c] = psi[r] * std::conj(psi[c]);
      }
    }
    return out;
  }

  unsigned num_qubits() const { return n_; }
  std::size_t dim() const { return std::size_t{1} << n_; }

  Amplitude operator()(std::size_t row, std::size_t col) const {
    return data_[(row << n_) | col];
  }
  Amplitude& operator()(std::size_t row, std::size_t col) {
    return data_[(row << n_) | col];
  }

  std::span<Amplitude> data() { return data_; }
  std::span<const Amplitude> data() const { return data_; }

  double trace() const {
    double t = 0.0;
    for (std::size_t i = 0; i < dim(); ++i) t += (*this)(i, i).real();
    return t;
  }

  bool is_hermitian(double tol = 1e-12) const {
    for (std::size_t r = 0; r < dim(); ++r) {
      for (std::size_t c = r; c < dim(); ++c) {
        if (std::abs((*this)(r, c) - std::conj((*this)(c, r))) > tol) return false;
      }
    }
    return true;
  }

  void set_zero() { std::fill(data_.begin(), data_.end(), Amplitude{0.0}); }

  /// this += factor * other
  void add_scaled(const DensityMatrix& other, double factor) {
    if (other.n_ != n_) throw PreconditionError("DensityMatrix: size mismatch");
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += factor * other.data_[i];
  }

  void apply_1q(unsigned q, const kernels::Mat2& u) {
    check_qubit(q);
    kernels::apply_1q(data_, q + n_, u);
    kernels::apply_1q(data_, q, u.conj());
  }

  void apply_parity_phase(unsigned q1, unsigned q2, Amplitude even, Amplitude odd) {
    check_qubit(q1);
    check_qubit(q2);
    kernels::apply_parity_phase(data_, q1 + n_, q2 + n_, even, odd);
    kernels::apply_parity_phase(data_, q1, q2, std::conj(even), std::conj(odd));
  }

  /// rho -> P rho P for the register word with masks (x, z).
  void apply_pauli_conjugation(std::uint64_t x, std::uint64_t z) {
    kernels::apply_pauli(data_, (x << n_) | x, (z << n_) | z);
  }

  /// rho -> sum_P w_P P rho P with P acting on `support` (local qubit t is
  /// register qubit support[t]).
  void apply_mixture(const PauliMixture& map, std::span<const unsigned> support) {
    const unsigned a = map.arity();
    if (support.size() != a) {
      throw PreconditionError("DensityMatrix: mixture arity does not match support");
    }
    std::uint64_t seen = 0;
    for (unsigned q : support) {
      check_qubit(q);
      if (seen & (std::uint64_t{1} << q)) {
        throw PreconditionError("DensityMatrix: repeated support qubit");
      }
      seen |= std::uint64_t{1} << q;
    }
    const std::size_t local_dim = std::size_t{1} << a;
    // coef[x][r][c] = sum_z w(x, z) (-1)^{|(r^x)&z| + |(c^x)&z|}
    std::vector<double> coef(local_dim * local_dim * local_dim, 0.0);
    std::vector<bool> active(local_dim, false);
    const auto w = map.weights();
    for (std::uint64_t p = 0; p < w.size(); ++p) {
      if (w[p] == 0.0) continue;
      std::uint64_t x, z;
      pauli_index_masks(p, a, x, z);
      active[x] = true;
      for (std::size_t r = 0; r < local_dim; ++r) {
        for (std::size_t c = 0; c < local_dim; ++c) {
          const int parity = std::popcount((r ^ x) & z) + std::popcount((c ^ x) & z);
          coef[(x * local_dim + r) * local_dim + c] += (parity & 1) ? -w[p] : w[p];
        }
      }
    }
    std::vector<std::size_t> flips;
    std::vector<std::size_t> patterns;
    for (std::size_t x = 0; x < local_dim; ++x) {
      if (!active[x]) continue;
      std::size_t embedded = 0;
      for (unsigned t = 0; t < a; ++t) {
        if ((x >> t) & 1U) embedded |= std::size_t{1} << support[t];
      }
      flips.push_back((embedded << n_) | embedded);
      patterns.push_back(x);
    }
    scratch_.assign(data_.size(), Amplitude{0.0});
    const std::size_t col_mask = dim() - 1;
    for (std::size_t f = 0; f < data_.size(); ++f) {
      const std::size_t row = f >> n_, col = f & col_mask;
      std::size_t rl = 0, cl = 0;
      for (unsigned t = 0; t < a; ++t) {
        rl |= ((row >> support[t]) & 1U) << t;
        cl |= ((col >> support[t]) & 1U) << t;
      }
      Amplitude acc{0.0};
      for (std::size_t k = 0; k < patterns.size(); ++k) {
        const double c = coef[(patterns[k] * local_dim + rl) * local_dim + cl];
        if (c != 0.0) acc += c * data_[f ^ flips[k]];
      }
      scratch_[f] = acc;
    }
    data_.swap(scratch_);
  }

  /// sum_i rho_ii f(i) for a real function of the basis index.
  template <class Fn>
  double diagonal_expectation(Fn&& f) const {
    double acc = 0.0;
    for (std::size_t i = 0; i < dim(); ++i) acc += (*this)(i, i).real() * f(i);
    return acc;
  }

 private:
  void check_qubit(unsigned q) const {
    if (q >= n_) throw PreconditionError("DensityMatrix: qubit index out of range");
  }

  unsigned n_;
  std::vector<Amplitude> data_;
  std::vector<Amplitude> scratch_;
};

namespace detail {
inline std::vector<unsigned> leading_support(unsigned arity) {
  std::vector<unsigned> s(arity);
  std::iota(s.begin(), s.end(), 0U);
  return s;
}
}  // namespace detail

/// Applies a local channel on `support`; trace is preserved.
inline DensityMatrix apply_channel_to_density_matrix(
    const StochasticPauliChannel& channel, DensityMatrix dm,
    std::span<const unsigned> support) {
  dm.apply_mixture(channel.as_mixture(), support);
  return dm;
}

/// Channel acting on the whole register (arity must equal the qubit count).
inline DensityMatrix apply_channel_to_density_matrix(
    const StochasticPauliChannel& channel, DensityMatrix dm) {
  if (channel.arity() != dm.num_qubits()) {
    throw PreconditionError("apply_channel_to_density_matrix: dimension mismatch");
  }
  const auto support = detail::leading_support(channel.arity());
  return apply_channel_to_density_matrix(channel, std::move(dm), support);
}

/// Applies (1 + eps1) I - eps2 E on `support`. The result may be unphysical;
/// Hermiticity and trace are preserved.
inline DensityMatrix apply_channel_to_density_matrix(
    const QuasiInverseChannel& quasi, DensityMatrix dm,
    std::span<const unsigned> support) {
  dm.apply_mixture(quasi.as_mixture(), support);
  return dm;
}

inline DensityMatrix apply_channel_to_density_matrix(
    const QuasiInverseChannel& quasi, DensityMatrix dm) {
  if (quasi.arity() != dm.num_qubits()) {
    throw PreconditionError("apply_channel_to_density_matrix: dimension mismatch");
  }
  const auto support = detail::leading_support(quasi.arity());
  return apply_channel_to_density_matrix(quasi, std::move(dm), support);
}

}  // namespace fpec
