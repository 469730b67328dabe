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

// Amplitude kernels shared by the statevector and (vectorized) density
// matrix engines. Qubit q is bit q of the basis index.

#include <bit>
#include <cmath>
#include <complex>
#include <cstdint>
#include <span>

namespace fpec::kernels {

using Amplitude = std::complex<double>;

struct Mat2 {
  Amplitude m00, m01, m10, m11;

  Mat2 conj() const {
    return {std::conj(m00), std::conj(m01), std::conj(m10), std::conj(m11)};
  }
};

/// exp(-i theta X / 2)
inline Mat2 rx_matrix(double theta) {
  const double c = std::cos(theta / 2), s = std::sin(theta / 2);
  return {{c, 0}, {0, -s}, {0, -s}, {c, 0}};
}

/// exp(-i theta Y / 2)
inline Mat2 ry_matrix(double theta) {
  const double c = std::cos(theta / 2), s = std::sin(theta / 2);
  return {{c, 0}, {-s, 0}, {s, 0}, {c, 0}};
}

inline void apply_1q(std::span<Amplitude> amps, unsigned q, const Mat2& u) {
  const std::size_t stride = std::size_t{1} << q;
  const std::size_t size = amps.size();
  for (std::size_t base = 0; base < size; base += 2 * stride) {
    for (std::size_t i = base; i < base + stride; ++i) {
      const Amplitude a0 = amps[i];
      const Amplitude a1 = amps[i + stride];
      amps[i] = u.m00 * a0 + u.m01 * a1;
      amps[i + stride] = u.m10 * a0 + u.m11 * a1;
    }
  }
}

/// Multiplies each amplitude by `even` when bits q1 and q2 agree and by
/// `odd` otherwise.
inline void apply_parity_phase(std::span<Amplitude> amps, unsigned q1,
                               unsigned q2, Amplitude even, Amplitude odd) {
  for (std::size_t i = 0; i < amps.size(); ++i) {
    const bool parity = ((i >> q1) ^ (i >> q2)) & 1U;
    amps[i] *= parity ? odd : even;
  }
}

/// Applies phase * X^x Z^z, i.e. |i> -> phase (-1)^{|i & z|} |i ^ x>.
inline void apply_pauli(std::span<Amplitude> amps, std::uint64_t x,
                        std::uint64_t z, Amplitude phase = 1.0) {
  auto sign = [z](std::size_t i) {
    return (std::popcount(static_cast<std::uint64_t>(i) & z) & 1) ? -1.0 : 1.0;
  };
  if (x == 0) {
    if (z == 0 && phase == Amplitude(1.0)) return;
    for (std::size_t i = 0; i < amps.size(); ++i) amps[i] *= phase * sign(i);
    return;
  }
  for (std::size_t i = 0; i < amps.size(); ++i) {
    const std::size_t j = i ^ static_cast<std::size_t>(x);
    if (j < i) continue;
    const Amplitude ai = amps[i];
    const Amplitude aj = amps[j];
    amps[j] = phase * sign(i) * ai;
    amps[i] = phase * sign(j) * aj;
  }
}

/// i^{y_count}, the phase turning X^x Z^z into the Hermitian Pauli word.
inline Amplitude pauli_phase(unsigned y_count) {
  switch (y_count & 3U) {
    case 0: return {1, 0};
    case 1: return {0, 1};
    case 2: return {-1, 0};
    default: return {0, -1};
  }
}

}  // namespace fpec::kernels
