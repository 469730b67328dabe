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

// Experiment configuration: TOML or JSON documents with one schema,
// validated strictly (unknown keys are errors).

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "fpec/channel.hpp"
#include "fpec/circuit.hpp"
#include "fpec/density_matrix.hpp"
#include "fpec/errors.hpp"
#include "fpec/gamma.hpp"
#include "fpec/observable.hpp"
#include "fpec/report.hpp"
#include "fpec/toml_lite.hpp"

namespace fpec {

// Channel description files: {"arity": n, "probs": [{"pauli": "XI", "p": 0.01}, ...]}
// with the identity entry optional.

inline StochasticPauliChannel channel_from_json(const nlohmann::json& j) {
  try {
    if (!j.is_object()) throw ConfigError("channel file: expected an object");
    for (const auto& [k, v] : j.items()) {
      if (k != "arity" && k != "probs") throw ConfigError("channel file: unknown key \"" + k + "\"");
    }
    const unsigned arity = j.at("arity").get<unsigned>();
    std::vector<std::pair<PauliString, double>> entries;
    for (const auto& e : j.at("probs")) {
      for (const auto& [k, v] : e.items()) {
        if (k != "pauli" && k != "p") throw ConfigError("channel file: unknown key \"" + k + "\"");
      }
      entries.emplace_back(PauliString::parse(e.at("pauli").get<std::string>()), e.at("p").get<double>());
    }
    return StochasticPauliChannel::from_entries(arity, entries, true);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("channel file: ") + e.what());
  } catch (const PreconditionError& e) {
    throw ConfigError(std::string("channel file: ") + e.what());
  }
}

inline nlohmann::json channel_to_json(const StochasticPauliChannel& ch) {
  nlohmann::json probs = nlohmann::json::array();
  for (std::uint64_t i = 0; i < pauli_count(ch.arity()); ++i) {
    if (ch.probability(i) == 0.0) continue;
    probs.push_back({{"pauli", PauliString::from_index(ch.arity(), i).str()}, {"p", ch.probability(i)}});
  }
  return {{"arity", ch.arity()}, {"probs", probs}};
}

inline nlohmann::json quasi_to_json(const QuasiInverseChannel& q) {
  nlohmann::json terms = nlohmann::json::array();
  for (const QuasiTerm& t : q.terms()) terms.push_back({{"pauli", t.pauli.str()}, {"c", t.coefficient}});
  return {{"arity", q.arity()}, {"eps1", q.eps1()}, {"eps2", q.eps2()},
          {"overhead", q.overhead()}, {"terms", terms}};
}

inline std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// Parses a .toml file through the TOML reader and anything else as JSON.
inline nlohmann::json load_document(const std::filesystem::path& path) {
  const std::string text = read_text_file(path);
  if (path.extension() == ".toml") return toml::parse(text);
  try {
    return nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

inline StochasticPauliChannel load_channel_file(const std::filesystem::path& path) {
  return channel_from_json(load_document(path));
}

enum class InverseForm { Pauli, Replacement };

struct ExperimentConfig {
  std::uint64_t seed = 0;
  unsigned threads = 1;
  std::uint64_t shots = 5000;
  std::vector<Method> methods{Method::Fpec};
  std::string observable = "sz_squared";
  std::string z_word;  // observable = "z_word" only
  LatticeSpec lattice;
  double initial_angle = 0.0;
  StochasticPauliChannel channel = depolarizing_channel(2, 0.0);
  std::optional<StochasticPauliChannel> assumed_channel;
  InverseForm inverse = InverseForm::Pauli;
  TruncationPolicy truncation = TruncationPolicy::bias_tolerance(1e-3);
  std::vector<double> zne_scales{1.0, 4.0};
  std::vector<std::size_t> steps{1};
  std::optional<std::string> output;
  std::string format = "csv";
  std::optional<bool> exact;

  DiagonalObservable make_observable() const {
    if (observable == "sz_squared") return DiagonalObservable::sz_squared();
    if (observable == "z_prefix_average") return DiagonalObservable::z_prefix_average();
    return DiagonalObservable::z_word(z_word);
  }

  /// Inverse built from the assumed channel when one is given.
  QuasiInverseChannel make_inverse() const {
    const StochasticPauliChannel& model = assumed_channel ? *assumed_channel : channel;
    return inverse == InverseForm::Replacement ? replacement_inverse(model) : invert_channel(model);
  }

  bool wants_exact() const {
    return exact.value_or(lattice.num_qubits() <= kDensityMatrixMaxQubits);
  }
};

namespace detail {

inline void check_keys(const nlohmann::json& j, const std::string& where,
                       std::initializer_list<const char*> allowed) {
  if (!j.is_object()) throw ConfigError(where + ": expected a table");
  std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [k, v] : j.items()) {
    if (!ok.count(k)) throw ConfigError(where + ": unknown key \"" + k + "\"");
  }
}

template <class T>
T get_as(const nlohmann::json& j, const std::string& key, const std::string& where) {
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError(where + "." + key + ": missing or of the wrong type");
  }
}

inline double get_number(const nlohmann::json& j, const std::string& key, const std::string& where) {
  if (!j.contains(key) || !j.at(key).is_number()) {
    throw ConfigError(where + "." + key + ": expected a number");
  }
  return j.at(key).get<double>();
}

inline std::uint64_t get_count(const nlohmann::json& j, const std::string& key, const std::string& where) {
  if (!j.contains(key) || !j.at(key).is_number_integer() || j.at(key).get<std::int64_t>() < 0) {
    throw ConfigError(where + "." + key + ": expected a non-negative integer");
  }
  return j.at(key).get<std::uint64_t>();
}

inline StochasticPauliChannel parse_channel(const nlohmann::json& j, const std::string& where,
                                            const std::filesystem::path& base) {
  check_keys(j, where, {"kind", "eps", "avg_infidelity", "arity", "path", "paulis", "probs"});
  const std::string kind = get_as<std::string>(j, "kind", where);
  try {
    if (kind == "depolarizing") {
      check_keys(j, where, {"kind", "eps", "avg_infidelity", "arity"});
      const unsigned arity = j.contains("arity") ? static_cast<unsigned>(get_count(j, "arity", where)) : 2;
      if (j.contains("eps") == j.contains("avg_infidelity")) {
        throw ConfigError(where + ": give exactly one of eps or avg_infidelity");
      }
      if (j.contains("eps")) return depolarizing_channel(arity, get_number(j, "eps", where));
      return infidelity_to_depolarizing(get_number(j, "avg_infidelity", where), arity);
    }
    if (kind == "file") {
      check_keys(j, where, {"kind", "path"});
      std::filesystem::path p = get_as<std::string>(j, "path", where);
      if (p.is_relative()) p = base / p;
      if (!std::filesystem::exists(p)) throw ConfigError(where + ".path: " + p.string() + " does not exist");
      return load_channel_file(p);
    }
    if (kind == "pauli") {
      check_keys(j, where, {"kind", "paulis", "probs"});
      const auto words = get_as<std::vector<std::string>>(j, "paulis", where);
      const auto probs = get_as<std::vector<double>>(j, "probs", where);
      if (words.empty() || words.size() != probs.size()) {
        throw ConfigError(where + ": paulis and probs must be non-empty and of equal length");
      }
      std::vector<std::pair<PauliString, double>> entries;
      for (std::size_t i = 0; i < words.size(); ++i) entries.emplace_back(PauliString::parse(words[i]), probs[i]);
      return StochasticPauliChannel::from_entries(static_cast<unsigned>(words[0].size()), entries, true);
    }
  } catch (const PreconditionError& e) {
    throw ConfigError(where + ": " + e.what());
  }
  throw ConfigError(where + ".kind: expected depolarizing, file or pauli (got \"" + kind + "\")");
}

}  // namespace detail

/// Builds a validated config; `base` resolves relative file references.
inline ExperimentConfig config_from_json(const nlohmann::json& j,
                                         const std::filesystem::path& base = ".") {
  using detail::check_keys;
  check_keys(j, "config", {"seed", "threads", "shots", "methods", "observable", "z_word", "steps",
                           "step_range", "output", "format", "exact", "inverse", "lattice", "channel",
                           "assumed_channel", "truncation", "zne"});
  ExperimentConfig c;
  if (!j.contains("seed")) throw ConfigError("config: seed is required");
  c.seed = detail::get_count(j, "seed", "config");
  if (j.contains("threads")) {
    c.threads = static_cast<unsigned>(detail::get_count(j, "threads", "config"));
    if (c.threads == 0) throw ConfigError("config.threads: must be >= 1");
  }
  if (j.contains("shots")) {
    c.shots = detail::get_count(j, "shots", "config");
    if (c.shots == 0) throw ConfigError("config.shots: must be >= 1");
  }
  if (j.contains("methods")) {
    c.methods.clear();
    for (const auto& m : detail::get_as<std::vector<std::string>>(j, "methods", "config")) {
      c.methods.push_back(parse_method(m));
    }
    if (c.methods.empty()) throw ConfigError("config.methods: list is empty");
  }
  if (j.contains("observable")) {
    c.observable = detail::get_as<std::string>(j, "observable", "config");
    if (c.observable != "sz_squared" && c.observable != "z_prefix_average" && c.observable != "z_word") {
      throw ConfigError("config.observable: expected sz_squared, z_prefix_average or z_word");
    }
  }
  if (j.contains("z_word")) c.z_word = detail::get_as<std::string>(j, "z_word", "config");
  if (c.observable == "z_word" && c.z_word.empty()) throw ConfigError("config.z_word: required for observable z_word");
  if (j.contains("steps") && j.contains("step_range")) {
    throw ConfigError("config: give steps or step_range, not both");
  }
  if (j.contains("steps")) {
    const auto& s = j.at("steps");
    c.steps = s.is_array() ? detail::get_as<std::vector<std::size_t>>(j, "steps", "config")
                           : std::vector<std::size_t>{detail::get_count(j, "steps", "config")};
  }
  if (j.contains("step_range")) {
    const auto r = detail::get_as<std::vector<std::size_t>>(j, "step_range", "config");
    if (r.size() != 2 || r[0] > r[1]) throw ConfigError("config.step_range: expected [first, last]");
    c.steps.clear();
    for (std::size_t s = r[0]; s <= r[1]; ++s) c.steps.push_back(s);
  }
  if (j.contains("output")) {
    std::filesystem::path p = detail::get_as<std::string>(j, "output", "config");
    if (p.is_relative()) p = base / p;
    c.output = p.string();
  }
  if (j.contains("format")) {
    c.format = detail::get_as<std::string>(j, "format", "config");
    if (c.format != "csv" && c.format != "json") throw ConfigError("config.format: expected csv or json");
  }
  if (j.contains("exact")) c.exact = detail::get_as<bool>(j, "exact", "config");
  if (j.contains("inverse")) {
    const auto form = detail::get_as<std::string>(j, "inverse", "config");
    if (form == "pauli") c.inverse = InverseForm::Pauli;
    else if (form == "replacement") c.inverse = InverseForm::Replacement;
    else throw ConfigError("config.inverse: expected pauli or replacement");
  }
  if (j.contains("lattice")) {
    const auto& l = j.at("lattice");
    check_keys(l, "lattice", {"rows", "cols", "J", "h", "tau", "initial_angle"});
    if (l.contains("rows")) c.lattice.rows = static_cast<unsigned>(detail::get_count(l, "rows", "lattice"));
    if (l.contains("cols")) c.lattice.cols = static_cast<unsigned>(detail::get_count(l, "cols", "lattice"));
    if (l.contains("J")) c.lattice.coupling = detail::get_number(l, "J", "lattice");
    if (l.contains("h")) c.lattice.field = detail::get_number(l, "h", "lattice");
    if (l.contains("tau")) c.lattice.tau = detail::get_number(l, "tau", "lattice");
    if (l.contains("initial_angle")) c.initial_angle = detail::get_number(l, "initial_angle", "lattice");
    if (c.lattice.rows == 0 || c.lattice.cols == 0) throw ConfigError("lattice: rows and cols must be >= 1");
    if (c.lattice.num_qubits() > kMaxQubits) throw ConfigError("lattice: too many qubits");
  }
  if (!j.contains("channel")) throw ConfigError("config: [channel] is required");
  c.channel = detail::parse_channel(j.at("channel"), "channel", base);
  if (j.contains("assumed_channel")) {
    c.assumed_channel = detail::parse_channel(j.at("assumed_channel"), "assumed_channel", base);
    if (c.assumed_channel->arity() != c.channel.arity()) {
      throw ConfigError("assumed_channel: arity differs from channel");
    }
  }
  if (c.channel.arity() != 2) throw ConfigError("channel: the Trotter circuit needs a two-qubit channel");
  if (j.contains("truncation")) {
    const auto& t = j.at("truncation");
    check_keys(t, "truncation", {"policy", "delta", "order"});
    const auto policy = detail::get_as<std::string>(t, "policy", "truncation");
    if (policy == "bias") {
      const double delta = detail::get_number(t, "delta", "truncation");
      if (!(delta > 0.0)) throw ConfigError("truncation.delta: must be positive");
      c.truncation = TruncationPolicy::bias_tolerance(delta);
    } else if (policy == "shots") {
      c.truncation = TruncationPolicy::shot_limited();
    } else if (policy == "fixed") {
      c.truncation = TruncationPolicy::fixed_order(detail::get_count(t, "order", "truncation"));
    } else {
      throw ConfigError("truncation.policy: expected bias, shots or fixed");
    }
  }
  if (j.contains("zne")) {
    const auto& z = j.at("zne");
    check_keys(z, "zne", {"scales"});
    c.zne_scales = detail::get_as<std::vector<double>>(z, "scales", "zne");
    if (c.zne_scales.size() < 2) throw ConfigError("zne.scales: need at least two scales");
    if (!(c.zne_scales[0] >= 1.0)) throw ConfigError("zne.scales: smallest scale must be >= 1");
    for (std::size_t i = 1; i < c.zne_scales.size(); ++i) {
      if (!(c.zne_scales[i] > c.zne_scales[i - 1])) throw ConfigError("zne.scales: must be strictly increasing");
    }
  }
  if (c.exact.value_or(false) && c.lattice.num_qubits() > kDensityMatrixMaxQubits) {
    throw ConfigError("config.exact: exact values are limited to " +
                      std::to_string(kDensityMatrixMaxQubits) + " qubits");
  }
  if (c.observable == "z_word") {
    const PauliString w = PauliString::parse(c.z_word);
    if (w.size() != c.lattice.num_qubits() || w.x_mask() != 0) {
      throw ConfigError("config.z_word: need one I/Z character per qubit");
    }
  }
  if (c.inverse == InverseForm::Replacement) {
    try {
      (void)c.make_inverse();
    } catch (const PreconditionError& e) {
      throw ConfigError(std::string("config.inverse: ") + e.what());
    }
  }
  return c;
}

inline ExperimentConfig load_config(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw ConfigError("config file " + path.string() + " does not exist");
  return config_from_json(load_document(path), path.parent_path().empty() ? "." : path.parent_path());
}

}  // namespace fpec
