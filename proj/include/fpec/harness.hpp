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

// Sweeps over Trotter depth and estimation method, the mischaracterized
// inverse study, gamma profiles and report serialization.

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <type_traits>
#include <vector>

#include <json.hpp>

#include "fpec/baselines.hpp"
#include "fpec/config.hpp"
#include "fpec/fpec.hpp"
#include "fpec/gamma.hpp"
#include "fpec/report.hpp"
#include "fpec/simulator.hpp"

namespace fpec {

struct SweepRow {
  std::size_t steps = 0;
  Method method = Method::Raw;
  double mean = 0.0;
  std::optional<double> std_error;
  std::optional<double> exact_value;
  std::optional<double> bias;  // |mean - exact_value|
  std::optional<double> var_per_shot;
  std::optional<std::size_t> K;
  std::optional<double> bias_bound;

  friend bool operator==(const SweepRow&, const SweepRow&) = default;
};

struct SweepResult {
  std::vector<SweepRow> rows;
  bool complete = true;
  std::string error;

  friend bool operator==(const SweepResult&, const SweepResult&) = default;
};

/// One estimate with its full report (and ZNE fit when applicable).
struct PointResult {
  EstimatorReport report;
  std::optional<ZneFit> zne;
};

/// Stream for (steps, method); independent of which other points run.
inline RngStream point_stream(std::uint64_t seed, std::size_t steps, Method method) {
  return RngStream(seed, steps).substream(static_cast<std::uint64_t>(method));
}

inline Circuit sweep_circuit(const ExperimentConfig& config, std::size_t steps) {
  LatticeSpec spec = config.lattice;
  spec.steps = steps;
  return build_tfim_trotter(spec, config.channel, config.initial_angle);
}

inline PointResult run_point(const ExperimentConfig& config, std::size_t steps, Method method) {
  const Circuit circuit = sweep_circuit(config, steps);
  const DiagonalObservable obs = config.make_observable();
  const RngStream rng = point_stream(config.seed, steps, method);
  PointResult out;
  switch (method) {
    case Method::Raw:
      out.report = raw_estimate(circuit, config.shots, obs, rng, config.threads);
      break;
    case Method::Fpec:
      out.report = fpec_estimate(circuit, config.make_inverse(), config.shots, config.truncation, obs, rng,
                                 config.threads);
      break;
    case Method::Pec:
      out.report = pec_estimate(circuit, config.make_inverse(), config.shots, obs, rng, config.threads);
      break;
    case Method::Zne:
      out.zne = zne_estimate(circuit, config.zne_scales, config.shots, obs, rng, config.threads);
      out.report = to_report(*out.zne);
      break;
  }
  return out;
}

inline std::optional<double> exact_value_for(const ExperimentConfig& config, std::size_t steps) {
  if (!config.wants_exact()) return std::nullopt;
  return exact_noiseless_expectation(sweep_circuit(config, steps), config.make_observable());
}

inline SweepRow make_row(std::size_t steps, const EstimatorReport& r, std::optional<double> exact) {
  SweepRow row;
  row.steps = steps;
  row.method = r.method;
  row.mean = r.mean;
  row.std_error = r.std_error;
  row.exact_value = exact;
  if (exact) row.bias = std::abs(r.mean - *exact);
  row.var_per_shot = r.variance_per_shot();
  row.K = r.K;
  if (r.method == Method::Fpec) row.bias_bound = r.bias_bound;
  if (r.method == Method::Pec) row.bias_bound = 0.0;
  return row;
}

namespace detail {
template <class Fn>
SweepResult sweep_points(const ExperimentConfig& config, const std::vector<Method>& methods, Fn&& point) {
  SweepResult result;
  for (std::size_t steps : config.steps) {
    try {
      const auto exact = exact_value_for(config, steps);
      for (Method m : methods) result.rows.push_back(make_row(steps, point(steps, m), exact));
    } catch (const std::exception& e) {
      result.complete = false;
      result.error = "steps=" + std::to_string(steps) + ": " + e.what();
      break;
    }
  }
  return result;
}
}  // namespace detail

/// Every (steps, method) pair of the config. A failing point stops the
/// sweep; rows so far are kept and the result is marked incomplete.
inline SweepResult run_sweep(const ExperimentConfig& config) {
  return detail::sweep_points(config, config.methods, [&](std::size_t steps, Method m) {
    return run_point(config, steps, m).report;
  });
}

/// FPEC with the inverse of the assumed channel against trajectories of the
/// true channel, next to the raw estimate at the same depth.
inline SweepResult mischaracterization_study(const ExperimentConfig& config) {
  if (!config.assumed_channel) {
    throw ConfigError("mischar: config needs an [assumed_channel] table");
  }
  return detail::sweep_points(config, {Method::Raw, Method::Fpec}, [&](std::size_t steps, Method m) {
    return run_point(config, steps, m).report;
  });
}

// ---------------------------------------------------------------------------
// Gamma profile

struct GammaRow {
  std::size_t k = 0;
  double abs_gamma = 0.0;
  double log10_abs_gamma = 0.0;
};

/// |gamma_k| for k up to the storage cutoff, extended to at least
/// `min_orders` rows (bounded by l + 1) from the closed form.
inline std::vector<GammaRow> gamma_profile(std::size_t sites, double eps1, double eps2,
                                           std::size_t min_orders = 0) {
  if (sites == 0) throw PreconditionError("gamma_profile: need at least one site");
  const GammaSeries series(eps1, eps2, sites);
  const std::size_t rows = std::min(sites + 1, std::max(series.max_order() + 1, min_orders));
  std::vector<GammaRow> out;
  for (std::size_t k = 0; k < rows; ++k) {
    const double lg = series.log_abs_gamma_unbounded(k);
    out.push_back({k, std::exp(lg), lg / std::log(10.0)});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Serialization

namespace detail {
inline std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

template <class T>
std::string csv_field(const std::optional<T>& v) {
  if (!v) return "";
  if constexpr (std::is_floating_point_v<T>) return format_double(*v);
  else return std::to_string(*v);
}
}  // namespace detail

inline constexpr const char* kSweepCsvHeader =
    "steps,method,mean,std_error,exact_value,bias,var_per_shot,K,bias_bound";

/// CSV with the fixed header; empty fields are unavailable values. An
/// incomplete sweep ends with a "# incomplete: ..." line.
inline std::string sweep_to_csv(const SweepResult& r) {
  std::string out = std::string(kSweepCsvHeader) + "\n";
  for (const SweepRow& row : r.rows) {
    out += std::to_string(row.steps) + "," + to_string(row.method) + "," + detail::format_double(row.mean) +
           "," + detail::csv_field(row.std_error) + "," + detail::csv_field(row.exact_value) + "," +
           detail::csv_field(row.bias) + "," + detail::csv_field(row.var_per_shot) + "," +
           detail::csv_field(row.K) + "," + detail::csv_field(row.bias_bound) + "\n";
  }
  if (!r.complete) out += "# incomplete: " + r.error + "\n";
  return out;
}

inline nlohmann::json to_json(const SweepResult& r) {
  nlohmann::json rows = nlohmann::json::array();
  for (const SweepRow& row : r.rows) {
    rows.push_back({{"steps", row.steps},
                    {"method", to_string(row.method)},
                    {"mean", row.mean},
                    {"std_error", detail::optional_json(row.std_error)},
                    {"exact_value", detail::optional_json(row.exact_value)},
                    {"bias", detail::optional_json(row.bias)},
                    {"var_per_shot", detail::optional_json(row.var_per_shot)},
                    {"K", detail::optional_json(row.K)},
                    {"bias_bound", detail::optional_json(row.bias_bound)}});
  }
  return {{"complete", r.complete}, {"error", r.complete ? nlohmann::json(nullptr) : nlohmann::json(r.error)},
          {"rows", rows}};
}

inline SweepResult sweep_from_json(const nlohmann::json& j) {
  SweepResult r;
  r.complete = j.at("complete").get<bool>();
  if (!j.at("error").is_null()) r.error = j.at("error").get<std::string>();
  for (const auto& o : j.at("rows")) {
    SweepRow row;
    row.steps = o.at("steps").get<std::size_t>();
    row.method = parse_method(o.at("method").get<std::string>());
    row.mean = o.at("mean").get<double>();
    row.std_error = detail::json_optional<double>(o.at("std_error"));
    row.exact_value = detail::json_optional<double>(o.at("exact_value"));
    row.bias = detail::json_optional<double>(o.at("bias"));
    row.var_per_shot = detail::json_optional<double>(o.at("var_per_shot"));
    row.K = detail::json_optional<std::size_t>(o.at("K"));
    row.bias_bound = detail::json_optional<double>(o.at("bias_bound"));
    r.rows.push_back(row);
  }
  return r;
}

inline std::string gamma_to_csv(const std::vector<GammaRow>& rows) {
  std::string out = "k,abs_gamma,log10_abs_gamma\n";
  for (const GammaRow& g : rows) {
    out += std::to_string(g.k) + "," + detail::format_double(g.abs_gamma) + "," +
           detail::format_double(g.log10_abs_gamma) + "\n";
  }
  return out;
}

inline nlohmann::json to_json(const std::vector<GammaRow>& rows) {
  nlohmann::json out = nlohmann::json::array();
  for (const GammaRow& g : rows) {
    out.push_back({{"k", g.k}, {"abs_gamma", g.abs_gamma}, {"log10_abs_gamma", g.log10_abs_gamma}});
  }
  return out;
}

/// Serialized sweep in "csv" or "json".
inline std::string emit_report(const SweepResult& r, const std::string& format) {
  if (format == "csv") return sweep_to_csv(r);
  if (format == "json") return to_json(r).dump(2) + "\n";
  throw ConfigError("unknown format \"" + format + "\" (expected csv or json)");
}

/// Writes `text` to `path`, or throws if the file cannot be written.
inline void write_text_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << text;
  if (!out) throw ConfigError("write failed for " + path.string());
}

}  // namespace fpec
