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
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "fpec/channel.hpp"
#include "fpec/errors.hpp"
#include "fpec/pauli.hpp"

namespace fpec {

enum class GateKind { Identity, Rx, Ry, Rzz, Pauli };

/// One gate of a circuit.
///
/// Angle conventions: Rx(t) = exp(-i t X/2), Ry(t) = exp(-i t Y/2),
/// Rzz(t) = exp(-i t Z Z) (no half angle, so a TFIM coupling term J tau maps
/// to Rzz(J tau)). Identity gates carry an arbitrary support so noise can be
/// attached to idle qubits or the whole register.
struct Gate {
  GateKind kind = GateKind::Identity;
  std::vector<unsigned> qubits;
  double angle = 0.0;
  PauliString pauli;  // local word on `qubits`, GateKind::Pauli only

  static Gate identity(std::vector<unsigned> qubits) {
    return Gate{GateKind::Identity, std::move(qubits), 0.0, {}};
  }
  static Gate rx(unsigned q, double theta) { return Gate{GateKind::Rx, {q}, theta, {}}; }
  static Gate ry(unsigned q, double theta) { return Gate{GateKind::Ry, {q}, theta, {}}; }
  static Gate rzz(unsigned q1, unsigned q2, double theta) {
    return Gate{GateKind::Rzz, {q1, q2}, theta, {}};
  }
  static Gate pauli_word(std::vector<unsigned> qubits, PauliString word) {
    return Gate{GateKind::Pauli, std::move(qubits), 0.0, std::move(word)};
  }

  unsigned arity() const { return static_cast<unsigned>(qubits.size()); }

  friend bool operator==(const Gate&, const Gate&) = default;
};

/// Ordered gate list with noise sites. Site s sits directly after gate
/// `site_gate(s)` and applies that site's channel on the gate's support.
///
/// Channels are stored at base strength together with a global noise scale,
/// so scale_noise composes multiplicatively without re-rounding.
class Circuit {
 public:
  explicit Circuit(unsigned num_qubits)
      : Circuit(num_qubits, std::vector<double>(num_qubits, 0.0)) {}

  /// `initial_angles[q]` prepares qubit q as Ry(angle)|0>.
  Circuit(unsigned num_qubits, std::vector<double> initial_angles)
      : n_(num_qubits), initial_angles_(std::move(initial_angles)) {
    if (num_qubits == 0 || num_qubits > kMaxQubits) {
      throw PreconditionError("Circuit: qubit count must be in [1, " +
                              std::to_string(kMaxQubits) + "]");
    }
    if (initial_angles_.size() != num_qubits) {
      throw PreconditionError("Circuit: one initial angle per qubit required");
    }
  }

  std::size_t add_gate(Gate gate) {
    validate(gate);
    gates_.push_back(std::move(gate));
    gate_site_.push_back(std::nullopt);
    return gates_.size() - 1;
  }

  /// Appends `gate` followed by a noise site; returns the site index.
  std::size_t add_noisy_gate(Gate gate, StochasticPauliChannel channel) {
    validate(gate);
    if (channel.arity() != gate.arity()) {
      throw PreconditionError("Circuit: channel arity " +
                              std::to_string(channel.arity()) +
                              " does not match gate support " +
                              std::to_string(gate.arity()));
    }
    const std::size_t gate_index = add_gate(std::move(gate));
    gate_site_[gate_index] = site_gate_.size();
    site_gate_.push_back(gate_index);
    effective_.push_back(channel.scaled(noise_scale_));
    base_.push_back(std::move(channel));
    return site_gate_.size() - 1;
  }

  unsigned num_qubits() const { return n_; }
  const std::vector<Gate>& gates() const { return gates_; }
  const std::vector<double>& initial_angles() const { return initial_angles_; }

  /// Number of noise sites l.
  std::size_t num_sites() const { return site_gate_.size(); }
  std::size_t site_gate(std::size_t site) const { return site_gate_.at(site); }
  std::optional<std::size_t> site_at_gate(std::size_t gate) const {
    return gate_site_.at(gate);
  }
  const std::vector<unsigned>& site_support(std::size_t site) const {
    return gates_[site_gate_.at(site)].qubits;
  }

  /// Channel in effect at `site` (base channel times noise scale).
  const StochasticPauliChannel& site_channel(std::size_t site) const {
    return effective_.at(site);
  }
  const StochasticPauliChannel& base_channel(std::size_t site) const {
    return base_.at(site);
  }
  double noise_scale() const { return noise_scale_; }

  /// Same gates with every channel replaced by the identity.
  Circuit noiseless() const { return with_noise_scale(0.0); }

  Circuit with_noise_scale(double scale) const {
    Circuit out = *this;
    out.noise_scale_ = scale;
    for (std::size_t s = 0; s < base_.size(); ++s) {
      out.effective_[s] = base_[s].scaled(scale);
    }
    return out;
  }

  friend bool operator==(const Circuit& a, const Circuit& b) {
    return a.n_ == b.n_ && a.initial_angles_ == b.initial_angles_ &&
           a.gates_ == b.gates_ && a.site_gate_ == b.site_gate_ &&
           a.base_ == b.base_ && a.noise_scale_ == b.noise_scale_;
  }

 private:
  void validate(const Gate& gate) const {
    std::uint64_t seen = 0;
    for (unsigned q : gate.qubits) {
      if (q >= n_) throw PreconditionError("Circuit: gate qubit index out of range");
      if (seen & (std::uint64_t{1} << q)) {
        throw PreconditionError("Circuit: gate acts twice on one qubit");
      }
      seen |= std::uint64_t{1} << q;
    }
    const unsigned expected = gate.kind == GateKind::Rx || gate.kind == GateKind::Ry ? 1
                              : gate.kind == GateKind::Rzz                        ? 2
                                                                                  : 0;
    if (expected != 0 && gate.arity() != expected) {
      throw PreconditionError("Circuit: wrong number of qubits for gate");
    }
    if (gate.kind == GateKind::Identity && gate.qubits.empty()) {
      throw PreconditionError("Circuit: identity gate needs a support");
    }
    if (gate.kind == GateKind::Pauli && gate.pauli.size() != gate.arity()) {
      throw PreconditionError("Circuit: Pauli word does not match support");
    }
  }

  unsigned n_;
  std::vector<double> initial_angles_;
  std::vector<Gate> gates_;
  std::vector<std::optional<std::size_t>> gate_site_;
  std::vector<std::size_t> site_gate_;
  std::vector<StochasticPauliChannel> base_;
  std::vector<StochasticPauliChannel> effective_;
  double noise_scale_ = 1.0;
};

/// Multiplies every site's non-identity probabilities by `factor` >= 1.
inline Circuit scale_noise(const Circuit& circuit, double factor) {
  if (!(factor >= 1.0)) {
    throw PreconditionError("scale_noise: factor must be >= 1");
  }
  const double total = circuit.noise_scale() * factor;
  for (std::size_t s = 0; s < circuit.num_sites(); ++s) {
    const double mass = circuit.base_channel(s).error_probability() * total;
    if (mass >= 1.0) {
      throw PreconditionError("scale_noise: site " + std::to_string(s) +
                              " would carry error mass " + std::to_string(mass));
    }
  }
  return circuit.with_noise_scale(total);
}

/// Rows x cols periodic lattice with J sum Z_i Z_j + h sum X_j.
struct LatticeSpec {
  unsigned rows = 3;
  unsigned cols = 3;
  double coupling = 1.0;  // J
  double field = 2.0;     // h
  double tau = 0.2;
  std::size_t steps = 0;

  unsigned num_qubits() const { return rows * cols; }
};

/// Nearest-neighbour pairs on a rows x cols torus: row-major vertices,
/// all horizontal edges first, then vertical. Self-loops and repeated
/// unordered pairs (from a dimension of 1 or 2) are dropped.
inline std::vector<std::pair<unsigned, unsigned>> torus_edges(unsigned rows, unsigned cols) {
  if (rows == 0 || cols == 0) throw PreconditionError("torus_edges: empty lattice");
  std::vector<std::pair<unsigned, unsigned>> edges;
  std::set<std::pair<unsigned, unsigned>> seen;
  auto add = [&](unsigned a, unsigned b) {
    if (a == b) return;
    if (seen.insert({std::min(a, b), std::max(a, b)}).second) edges.emplace_back(a, b);
  };
  for (unsigned r = 0; r < rows; ++r) {
    for (unsigned c = 0; c < cols; ++c) add(r * cols + c, r * cols + (c + 1) % cols);
  }
  for (unsigned r = 0; r < rows; ++r) {
    for (unsigned c = 0; c < cols; ++c) add(r * cols + c, ((r + 1) % rows) * cols + c);
  }
  return edges;
}

/// Second-order Trotter circuit: per step a half-angle Rx layer, Rzz(J tau)
/// on every edge (each followed by a noise site with `channel`), then the
/// closing Rx layer. Half layers of neighbouring steps are kept separate.
inline Circuit build_tfim_trotter(const LatticeSpec& spec,
                                  const StochasticPauliChannel& channel,
                                  double initial_angle) {
  if (channel.arity() != 2) {
    throw PreconditionError("build_tfim_trotter: channel must act on two qubits");
  }
  if (spec.rows == 0 || spec.cols == 0) {
    throw PreconditionError("build_tfim_trotter: rows and cols must be >= 1");
  }
  const unsigned n = spec.num_qubits();
  Circuit circuit(n, std::vector<double>(n, initial_angle));
  const auto edges = torus_edges(spec.rows, spec.cols);
  const double x_angle = spec.field * spec.tau;
  const double zz_angle = spec.coupling * spec.tau;
  for (std::size_t step = 0; step < spec.steps; ++step) {
    for (unsigned q = 0; q < n; ++q) circuit.add_gate(Gate::rx(q, x_angle));
    for (const auto& [a, b] : edges) circuit.add_noisy_gate(Gate::rzz(a, b, zz_angle), channel);
    for (unsigned q = 0; q < n; ++q) circuit.add_gate(Gate::rx(q, x_angle));
  }
  return circuit;
}

/// Uniform depolarizing channel matching an average gate infidelity r:
/// eps = r (d + 1) / d with d = 2^arity.
inline StochasticPauliChannel infidelity_to_depolarizing(double avg_infidelity,
                                                         unsigned arity) {
  if (!(avg_infidelity >= 0.0)) {
    throw PreconditionError("infidelity_to_depolarizing: infidelity must be >= 0");
  }
  const double d = static_cast<double>(std::uint64_t{1} << arity);
  const double eps = avg_infidelity * (d + 1.0) / d;
  if (eps >= 1.0) {
    throw PreconditionError("infidelity_to_depolarizing: infidelity too large");
  }
  return depolarizing_channel(arity, eps);
}

}  // namespace fpec
