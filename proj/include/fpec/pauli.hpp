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

#include <bit>
#include <cstdint>
#include <string>
#include <string_view>

#include "fpec/errors.hpp"

namespace fpec {

/// Largest register any Pauli word, state, or circuit may address.
inline constexpr unsigned kMaxQubits = 30;

enum class Pauli : std::uint8_t { I = 0, X = 1, Y = 2, Z = 3 };

/// Phase-free n-qubit Pauli word.
///
/// Character j of the text form acts on qubit j, so "XZ" is X on qubit 0 and
/// Z on qubit 1. The dense index of a word is sum_j digit_j * 4^j with
/// digits I=0, X=1, Y=2, Z=3; index 0 is always the identity.
class PauliString {
 public:
  PauliString() = default;

  explicit PauliString(unsigned num_qubits) : n_(num_qubits) {
    if (num_qubits > kMaxQubits) {
      throw PreconditionError("PauliString: at most " +
                              std::to_string(kMaxQubits) + " qubits");
    }
  }

  static PauliString parse(std::string_view text) {
    PauliString out(static_cast<unsigned>(text.size()));
    for (unsigned q = 0; q < text.size(); ++q) {
      switch (text[q]) {
        case 'I': case 'i': case '_': break;
        case 'X': case 'x': out.set(q, Pauli::X); break;
        case 'Y': case 'y': out.set(q, Pauli::Y); break;
        case 'Z': case 'z': out.set(q, Pauli::Z); break;
        default:
          throw PreconditionError("PauliString: invalid character '" +
                                  std::string(1, text[q]) + "' in \"" +
                                  std::string(text) + "\"");
      }
    }
    return out;
  }

  static PauliString from_index(unsigned num_qubits, std::uint64_t index) {
    PauliString out(num_qubits);
    for (unsigned q = 0; q < num_qubits; ++q) {
      out.set(q, static_cast<Pauli>(index & 3U));
      index >>= 2;
    }
    if (index != 0) {
      throw PreconditionError("PauliString: index out of range for arity");
    }
    return out;
  }

  static PauliString from_masks(unsigned num_qubits, std::uint64_t x,
                                std::uint64_t z) {
    PauliString out(num_qubits);
    const std::uint64_t allowed = mask_for(num_qubits);
    if ((x | z) & ~allowed) {
      throw PreconditionError("PauliString: mask exceeds arity");
    }
    out.x_ = x;
    out.z_ = z;
    return out;
  }

  unsigned size() const { return n_; }
  std::uint64_t x_mask() const { return x_; }
  std::uint64_t z_mask() const { return z_; }
  bool is_identity() const { return (x_ | z_) == 0; }
  unsigned weight() const { return static_cast<unsigned>(std::popcount(x_ | z_)); }
  unsigned y_count() const { return static_cast<unsigned>(std::popcount(x_ & z_)); }

  Pauli operator[](unsigned q) const {
    const unsigned xb = (x_ >> q) & 1U;
    const unsigned zb = (z_ >> q) & 1U;
    if (xb && zb) return Pauli::Y;
    if (xb) return Pauli::X;
    if (zb) return Pauli::Z;
    return Pauli::I;
  }

  void set(unsigned q, Pauli p) {
    if (q >= n_) throw PreconditionError("PauliString: qubit out of range");
    const std::uint64_t bit = std::uint64_t{1} << q;
    x_ &= ~bit;
    z_ &= ~bit;
    if (p == Pauli::X || p == Pauli::Y) x_ |= bit;
    if (p == Pauli::Z || p == Pauli::Y) z_ |= bit;
  }

  std::uint64_t index() const {
    std::uint64_t idx = 0;
    for (unsigned q = n_; q-- > 0;) {
      idx = (idx << 2) | static_cast<std::uint64_t>((*this)[q]);
    }
    return idx;
  }

  /// True when the two words commute as operators (even number of
  /// anticommuting single-qubit pairs).
  bool commutes_with(const PauliString& other) const {
    return ((std::popcount((x_ & other.z_) ^ (z_ & other.x_))) & 1) == 0;
  }

  std::string str() const {
    static constexpr char kChars[] = {'I', 'X', 'Y', 'Z'};
    std::string out(n_, 'I');
    for (unsigned q = 0; q < n_; ++q) out[q] = kChars[static_cast<int>((*this)[q])];
    return out;
  }

  friend bool operator==(const PauliString&, const PauliString&) = default;

  static std::uint64_t mask_for(unsigned num_qubits) {
    return num_qubits >= 64 ? ~std::uint64_t{0}
                            : (std::uint64_t{1} << num_qubits) - 1;
  }

 private:
  unsigned n_ = 0;
  std::uint64_t x_ = 0;
  std::uint64_t z_ = 0;
};

/// Number of Pauli words on `arity` qubits, 4^arity.
inline std::uint64_t pauli_count(unsigned arity) {
  return std::uint64_t{1} << (2 * arity);
}

/// X and Z bit masks of a dense Pauli index.
inline void pauli_index_masks(std::uint64_t index, unsigned arity,
                              std::uint64_t& x, std::uint64_t& z) {
  x = 0;
  z = 0;
  for (unsigned q = 0; q < arity; ++q) {
    const unsigned digit = static_cast<unsigned>((index >> (2 * q)) & 3U);
    if (digit == 1 || digit == 2) x |= std::uint64_t{1} << q;
    if (digit == 2 || digit == 3) z |= std::uint64_t{1} << q;
  }
}

/// Commutation sign s(P, Q) of two words given by dense index: +1 when they
/// commute, -1 otherwise.
inline int commutation_sign(std::uint64_t p, std::uint64_t q, unsigned arity) {
  std::uint64_t px, pz, qx, qz;
  pauli_index_masks(p, arity, px, pz);
  pauli_index_masks(q, arity, qx, qz);
  return (std::popcount((px & qz) ^ (pz & qx)) & 1) ? -1 : 1;
}

}  // namespace fpec
