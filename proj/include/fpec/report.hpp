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

#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "fpec/errors.hpp"
#include "fpec/parallel.hpp"

namespace fpec {

enum class Method { Raw, Fpec, Pec, Zne };

inline std::string to_string(Method m) {
  switch (m) {
    case Method::Raw: return "raw";
    case Method::Fpec: return "fpec";
    case Method::Pec: return "pec";
    default: return "zne";
  }
}

inline Method parse_method(const std::string& name) {
  if (name == "raw") return Method::Raw;
  if (name == "fpec") return Method::Fpec;
  if (name == "pec") return Method::Pec;
  if (name == "zne") return Method::Zne;
  throw ConfigError("unknown method \"" + name + "\" (expected raw, fpec, pec or zne)");
}

/// Mean and unbiased sample variance; variance is 0 for a single value.
struct SampleStats {
  double mean = 0.0;
  double variance = 0.0;
  std::size_t count = 0;
};

/// Two-pass statistics in index order, so results do not depend on how the
/// values were produced.
inline SampleStats sample_stats(std::span<const double> values) {
  SampleStats s;
  s.count = values.size();
  if (values.empty()) return s;
  double sum = 0.0;
  for (double v : values) sum += v;
  s.mean = sum / static_cast<double>(values.size());
  if (values.size() > 1) {
    double sq = 0.0;
    for (double v : values) sq += (v - s.mean) * (v - s.mean);
    s.variance = sq / static_cast<double>(values.size() - 1);
  }
  return s;
}

/// Evaluates shot(i) for every shot index, in parallel, into shot order.
template <class ShotFn>
std::vector<double> collect_shots(std::uint64_t count, unsigned threads, ShotFn&& shot) {
  std::vector<double> values(count);
  parallel_for(count, threads, [&](std::size_t i) { values[i] = shot(i); });
  return values;
}

struct OrderEstimate {
  std::size_t k = 0;
  double gamma = 0.0;
  std::uint64_t shots = 0;
  double mean = 0.0;
  double variance = 0.0;

  friend bool operator==(const OrderEstimate&, const OrderEstimate&) = default;
};

/// Result of one mitigated (or raw) estimate.
struct EstimatorReport {
  Method method = Method::Raw;
  double mean = 0.0;
  std::optional<double> std_error;  // absent when it cannot be estimated
  std::optional<std::size_t> K;     // truncation order (FPEC only)
  double bias_bound = 0.0;          // ||O|| sum_{k>K} |gamma_k|
  std::uint64_t shots = 0;
  std::vector<OrderEstimate> per_k;

  /// Single-shot variance of the estimator, M * std_error^2.
  std::optional<double> variance_per_shot() const {
    if (!std_error) return std::nullopt;
    return static_cast<double>(shots) * *std_error * *std_error;
  }

  friend bool operator==(const EstimatorReport&, const EstimatorReport&) = default;
};

namespace detail {
template <class T>
nlohmann::json optional_json(const std::optional<T>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}
template <class T>
std::optional<T> json_optional(const nlohmann::json& j) {
  if (j.is_null()) return std::nullopt;
  return j.get<T>();
}
}  // namespace detail

inline nlohmann::json to_json(const EstimatorReport& r) {
  nlohmann::json per_k = nlohmann::json::array();
  for (const OrderEstimate& o : r.per_k) {
    per_k.push_back({{"k", o.k}, {"gamma", o.gamma}, {"shots", o.shots},
                     {"mean", o.mean}, {"var", o.variance}});
  }
  return {{"method", to_string(r.method)},
          {"mean", r.mean},
          {"std_error", detail::optional_json(r.std_error)},
          {"K", detail::optional_json(r.K)},
          {"bias_bound", r.bias_bound},
          {"shots", r.shots},
          {"per_k", per_k}};
}

inline EstimatorReport report_from_json(const nlohmann::json& j) {
  EstimatorReport r;
  r.method = parse_method(j.at("method").get<std::string>());
  r.mean = j.at("mean").get<double>();
  r.std_error = detail::json_optional<double>(j.at("std_error"));
  r.K = detail::json_optional<std::size_t>(j.at("K"));
  r.bias_bound = j.at("bias_bound").get<double>();
  r.shots = j.value("shots", std::uint64_t{0});
  for (const auto& o : j.at("per_k")) {
    r.per_k.push_back({o.at("k").get<std::size_t>(), o.at("gamma").get<double>(),
                       o.at("shots").get<std::uint64_t>(), o.at("mean").get<double>(),
                       o.at("var").get<double>()});
  }
  return r;
}

}  // namespace fpec
