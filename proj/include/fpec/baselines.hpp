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

// Reference estimators: unmitigated sampling, per-gate quasi-probability
// PEC, exponential zero-noise extrapolation and the sampled-order variance
// gap.

#include <cfloat>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "fpec/channel.hpp"
#include "fpec/circuit.hpp"
#include "fpec/errors.hpp"
#include "fpec/fpec.hpp"
#include "fpec/gamma.hpp"
#include "fpec/observable.hpp"
#include "fpec/report.hpp"
#include "fpec/rng.hpp"
#include "fpec/simulator.hpp"

namespace fpec {

/// Plain noisy-circuit mean. Shot i draws from rng.substream(i).
inline EstimatorReport raw_estimate(const Circuit& circuit, std::uint64_t shots,
                                    const DiagonalObservable& obs, const RngStream& rng,
                                    unsigned threads = 1) {
  if (shots == 0) throw PreconditionError("raw_estimate: need at least one shot");
  obs.check_size(circuit.num_qubits());
  const auto values = collect_shots(shots, threads, [&](std::size_t shot) {
    RngStream r = rng.substream(shot);
    return obs.evaluate(run_trajectory(circuit, r));
  });
  const SampleStats s = sample_stats(values);
  EstimatorReport report;
  report.method = Method::Raw;
  report.mean = s.mean;
  report.shots = shots;
  if (shots >= 2) report.std_error = std::sqrt(s.variance / static_cast<double>(shots));
  return report;
}

/// One standard-PEC shot before the gamma_g^l rescaling.
struct PecShotRecord {
  double sign = 1.0;
  double value = 0.0;
  std::size_t ops_injected = 0;
};

/// Draws a quasi-sampling branch site by site: nothing with probability
/// (1 + eps1) / gamma_g, otherwise V_i with probability eps2 |c_i| / gamma_g
/// and sign -sign(c_i).
inline PecShotRecord pec_shot(const Circuit& circuit, const QuasiInverseChannel& quasi,
                              const DiagonalObservable& obs, RngStream& r) {
  const double gamma_g = quasi.overhead();
  const double keep = (1.0 + quasi.eps1()) / gamma_g;
  PecShotRecord rec;
  std::vector<Injection> injections;
  for (std::size_t s = 0; s < circuit.num_sites(); ++s) {
    const double u = r.uniform();
    if (u < keep || quasi.terms().empty()) continue;
    const QuasiTerm& t = quasi.terms()[quasi.sample_term(r.uniform())];
    if (t.coefficient > 0.0) rec.sign = -rec.sign;
    injections.push_back({s, t.pauli});
  }
  rec.ops_injected = injections.size();
  rec.value = obs.evaluate(run_trajectory(circuit, injections, r));
  return rec;
}

/// Standard per-gate PEC, mean gamma_g^l * mean(sign * value).
/// Shot i draws from rng.substream(i).
inline EstimatorReport pec_estimate(const Circuit& circuit, const QuasiInverseChannel& quasi,
                                    std::uint64_t shots, const DiagonalObservable& obs,
                                    const RngStream& rng, unsigned threads = 1) {
  if (shots == 0) throw PreconditionError("pec_estimate: need at least one shot");
  detail::check_quasi_matches(circuit, quasi);
  obs.check_size(circuit.num_qubits());
  const double log_scale =
      static_cast<double>(circuit.num_sites()) * std::log(quasi.overhead());
  if (log_scale > std::log(DBL_MAX) - std::log(obs.norm() + 1.0) - 1.0) {
    throw NumericError("pec_estimate: overhead gamma^l = exp(" + std::to_string(log_scale) +
                       ") overflows double precision");
  }
  const double scale = std::exp(log_scale);
  const auto values = collect_shots(shots, threads, [&](std::size_t shot) {
    RngStream r = rng.substream(shot);
    const PecShotRecord rec = pec_shot(circuit, quasi, obs, r);
    return rec.sign * rec.value;
  });
  const SampleStats s = sample_stats(values);
  EstimatorReport report;
  report.method = Method::Pec;
  report.mean = scale * s.mean;
  report.shots = shots;
  if (shots >= 2) {
    report.std_error = scale * std::sqrt(s.variance / static_cast<double>(shots));
  }
  if (!std::isfinite(report.mean)) throw NumericError("pec_estimate: non-finite result");
  return report;
}

struct ZnePoint {
  double scale = 1.0;
  double mean = 0.0;
  std::optional<double> std_error;
  std::uint64_t shots = 0;

  friend bool operator==(const ZnePoint&, const ZnePoint&) = default;
};

enum class ZneModel { Exponential, LinearFallback };

inline std::string to_string(ZneModel m) {
  return m == ZneModel::Exponential ? "exponential" : "linear";
}

struct ZneFit {
  std::vector<ZnePoint> points;
  ZneModel model = ZneModel::Exponential;
  double extrapolated = 0.0;
  std::optional<double> std_error;

  friend bool operator==(const ZneFit&, const ZneFit&) = default;
};

/// Least-squares fit of y = A exp(-b lambda) through log|y|, evaluated at
/// lambda = 0. With two points this is y1 (y1 / y2)^(lambda1 / (lambda2 -
/// lambda1)). Falls back to a straight line when the means change sign or
/// any |y| < 1e-6. Error bars propagate linearly from the per-point ones.
inline ZneFit fit_zero_noise(std::vector<ZnePoint> points) {
  if (points.size() < 2) throw PreconditionError("fit_zero_noise: need at least two scales");
  if (!(points.front().scale >= 1.0)) {
    throw PreconditionError("fit_zero_noise: smallest scale must be >= 1");
  }
  for (std::size_t i = 1; i < points.size(); ++i) {
    if (!(points[i].scale > points[i - 1].scale)) {
      throw PreconditionError("fit_zero_noise: scales must be strictly increasing");
    }
  }
  ZneFit fit;
  fit.model = ZneModel::Exponential;
  for (const ZnePoint& p : points) {
    if (std::abs(p.mean) < 1e-6 || p.mean * points.front().mean <= 0.0) {
      fit.model = ZneModel::LinearFallback;
    }
  }
  const double n = static_cast<double>(points.size());
  double xbar = 0.0;
  for (const ZnePoint& p : points) xbar += p.scale / n;
  double sxx = 0.0;
  for (const ZnePoint& p : points) sxx += (p.scale - xbar) * (p.scale - xbar);

  // Intercept = sum_i a_i y_i with a_i = 1/n - xbar (x_i - xbar) / Sxx.
  const bool exponential = fit.model == ZneModel::Exponential;
  double intercept = 0.0, var = 0.0;
  bool have_errors = true;
  for (const ZnePoint& p : points) {
    const double a = 1.0 / n - xbar * (p.scale - xbar) / sxx;
    const double y = exponential ? std::log(std::abs(p.mean)) : p.mean;
    intercept += a * y;
    if (!p.std_error) {
      have_errors = false;
      continue;
    }
    const double dy = exponential ? *p.std_error / std::abs(p.mean) : *p.std_error;
    var += a * a * dy * dy;
  }
  if (exponential) {
    const double sign = points.front().mean > 0.0 ? 1.0 : -1.0;
    fit.extrapolated = sign * std::exp(intercept);
    if (have_errors) fit.std_error = std::abs(fit.extrapolated) * std::sqrt(var);
  } else {
    fit.extrapolated = intercept;
    if (have_errors) fit.std_error = std::sqrt(var);
  }
  fit.points = std::move(points);
  return fit;
}

/// Raw means at each noise scale, M split evenly (remainder to the first
/// scales), then extrapolated. Scale i draws from rng.substream(i).
inline ZneFit zne_estimate(const Circuit& circuit, std::span<const double> scales,
                           std::uint64_t shots, const DiagonalObservable& obs,
                           const RngStream& rng, unsigned threads = 1) {
  if (scales.size() < 2) throw PreconditionError("zne_estimate: need at least two scales");
  if (shots < scales.size()) {
    throw PreconditionError("zne_estimate: fewer shots than noise scales");
  }
  const std::uint64_t base = shots / scales.size();
  const std::uint64_t extra = shots % scales.size();
  std::vector<ZnePoint> points;
  for (std::size_t i = 0; i < scales.size(); ++i) {
    if (i > 0 && !(scales[i] > scales[i - 1])) {
      throw PreconditionError("zne_estimate: scales must be strictly increasing");
    }
    const std::uint64_t m = base + (i < extra ? 1 : 0);
    const EstimatorReport r =
        raw_estimate(scale_noise(circuit, scales[i]), m, obs, rng.substream(i), threads);
    points.push_back({scales[i], r.mean, r.std_error, m});
  }
  return fit_zero_noise(std::move(points));
}

inline EstimatorReport to_report(const ZneFit& fit) {
  EstimatorReport r;
  r.method = Method::Zne;
  r.mean = fit.extrapolated;
  r.std_error = fit.std_error;
  for (const ZnePoint& p : fit.points) r.shots += p.shots;
  return r;
}

inline nlohmann::json to_json(const ZneFit& fit) {
  nlohmann::json points = nlohmann::json::array();
  for (const ZnePoint& p : fit.points) {
    points.push_back({{"scale", p.scale}, {"mean", p.mean},
                      {"std_error", detail::optional_json(p.std_error)}, {"shots", p.shots}});
  }
  return {{"method", "zne"},
          {"model", to_string(fit.model)},
          {"mean", fit.extrapolated},
          {"std_error", detail::optional_json(fit.std_error)},
          {"points", points}};
}

inline ZneFit zne_fit_from_json(const nlohmann::json& j) {
  ZneFit fit;
  const std::string model = j.at("model").get<std::string>();
  if (model != "exponential" && model != "linear") {
    throw ConfigError("unknown ZNE model \"" + model + "\"");
  }
  fit.model = model == "exponential" ? ZneModel::Exponential : ZneModel::LinearFallback;
  fit.extrapolated = j.at("mean").get<double>();
  fit.std_error = detail::json_optional<double>(j.at("std_error"));
  for (const auto& p : j.at("points")) {
    fit.points.push_back({p.at("scale").get<double>(), p.at("mean").get<double>(),
                          detail::json_optional<double>(p.at("std_error")),
                          p.at("shots").get<std::uint64_t>()});
  }
  return fit;
}

/// Variance of the deterministic per-order estimator, of the alternative
/// that samples order k with probability p_k, and their gap.
struct VarianceGap {
  double var_est = 0.0;
  double var_sampling = 0.0;
  double delta = 0.0;
};

/// norm^2 [sum p_k m_k^2 - (sum p_k s_k m_k)^2], computed as the weighted
/// spread norm^2 sum p_k (s_k m_k - mu)^2 with mu = sum p_k s_k m_k.
/// Probabilities are normalised internally.
inline double variance_gap(std::span<const double> probs, std::span<const double> signs,
                           std::span<const double> means, double norm) {
  if (probs.size() != signs.size() || probs.size() != means.size() || probs.empty()) {
    throw PreconditionError("variance_gap: inputs must have equal, nonzero length");
  }
  double total = 0.0;
  for (double p : probs) {
    if (!(p >= 0.0)) throw PreconditionError("variance_gap: negative probability");
    total += p;
  }
  if (!(total > 0.0)) throw PreconditionError("variance_gap: probabilities sum to zero");
  double mu = 0.0;
  for (std::size_t k = 0; k < probs.size(); ++k) mu += probs[k] / total * signs[k] * means[k];
  double spread = 0.0;
  for (std::size_t k = 0; k < probs.size(); ++k) {
    const double d = signs[k] * means[k] - mu;
    spread += probs[k] / total * d * d;
  }
  return norm * norm * spread;
}

inline VarianceGap sampling_variance_delta(const GammaSeries& series, std::size_t K,
                                           std::span<const double> means,
                                           std::span<const double> variances) {
  if (means.size() < K + 1 || variances.size() < K + 1) {
    throw PreconditionError("sampling_variance_delta: need one mean and variance per order");
  }
  std::vector<double> probs(K + 1), signs(K + 1);
  for (std::size_t k = 0; k <= K; ++k) {
    probs[k] = series.abs_gamma(k);
    signs[k] = k % 2 ? -1.0 : 1.0;
  }
  VarianceGap gap;
  gap.var_est = estimator_variance(series, K, variances);
  gap.delta = variance_gap(probs, signs, means.first(K + 1), series.head(K));
  gap.var_sampling = gap.var_est + gap.delta;
  return gap;
}

}  // namespace fpec
