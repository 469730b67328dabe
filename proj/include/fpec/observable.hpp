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
#include "fpec/pauli.hpp"

namespace fpec {

/// Z-basis measurement record; bit q of `bits` is qubit q.
struct Bitstring {
  std::uint64_t bits = 0;
  unsigned size = 0;

  /// Character j is qubit j, e.g. "0011" sets qubits 2 and 3.
  static Bitstring parse(std::string_view text) {
    Bitstring out{0, static_cast<unsigned>(text.size())};
    for (unsigned q = 0; q < text.size(); ++q) {
      if (text[q] == '1') out.bits |= std::uint64_t{1} << q;
      else if (text[q] != '0') throw PreconditionError("Bitstring: expected 0/1");
    }
    return out;
  }

  bool operator[](unsigned q) const { return (bits >> q) & 1U; }
  friend bool operator==(const Bitstring&, const Bitstring&) = default;
};

enum class ObservableKind { SzSquared, ZPrefixAverage, PauliZWord };

/// Z-diagonal observable with operator norm 1.
///
///   SzSquared      ((sum_j Z_j) / n)^2
///   ZPrefixAverage (sum_j prod_{i<=j} Z_i) / n
///   PauliZWord     prod_{i in mask} Z_i
class DiagonalObservable {
 public:
  static DiagonalObservable sz_squared() { return DiagonalObservable(ObservableKind::SzSquared, 0); }
  static DiagonalObservable z_prefix_average() {
    return DiagonalObservable(ObservableKind::ZPrefixAverage, 0);
  }
  static DiagonalObservable z_word(std::uint64_t mask) {
    return DiagonalObservable(ObservableKind::PauliZWord, mask);
  }
  /// Z word from text such as "ZIZ"; only I and Z are accepted.
  static DiagonalObservable z_word(std::string_view text) {
    const PauliString p = PauliString::parse(text);
    if (p.x_mask() != 0) throw PreconditionError("z_word: only I/Z allowed");
    return z_word(p.z_mask());
  }

  ObservableKind kind() const { return kind_; }
  std::uint64_t mask() const { return mask_; }
  double norm() const { return 1.0; }

  std::string name() const {
    switch (kind_) {
      case ObservableKind::SzSquared: return "sz_squared";
      case ObservableKind::ZPrefixAverage: return "z_prefix_average";
      default: return "z_word";
    }
  }

  /// Value on basis state `bits` of an n-qubit register.
  double evaluate(std::uint64_t bits, unsigned n) const {
    switch (kind_) {
      case ObservableKind::SzSquared: {
        const double m = (static_cast<double>(n) - 2.0 * std::popcount(bits)) / n;
        return m * m;
      }
      case ObservableKind::ZPrefixAverage: {
        double acc = 0.0;
        int prefix = 1;
        for (unsigned j = 0; j < n; ++j) {
          if ((bits >> j) & 1U) prefix = -prefix;
          acc += prefix;
        }
        return acc / n;
      }
      default:
        return (std::popcount(bits & mask_) & 1) ? -1.0 : 1.0;
    }
  }

  double evaluate(const Bitstring& b) const {
    check_size(b.size);
    if (b.size < 64 && (b.bits >> b.size) != 0) {
      throw PreconditionError("observable: bitstring has bits beyond its length");
    }
    return evaluate(b.bits, b.size);
  }

  void check_size(unsigned n) const {
    if (n == 0) throw PreconditionError("observable: empty bitstring");
    if (kind_ == ObservableKind::PauliZWord && n < 64 && (mask_ >> n) != 0) {
      throw PreconditionError("observable: Z word longer than the register");
    }
  }

 private:
  DiagonalObservable(ObservableKind kind, std::uint64_t mask) : kind_(kind), mask_(mask) {}

  ObservableKind kind_;
  std::uint64_t mask_;
};

inline double evaluate_observable(const DiagonalObservable& obs, const Bitstring& b) {
  return obs.evaluate(b);
}

}  // namespace fpec
