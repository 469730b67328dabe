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


#include <cmath>
#include <random>

#include <catch_amalgamated.hpp>

#include "fpec/baselines.hpp"
#include "fpec/oracle.hpp"
#include "test_support.hpp"

using namespace fpec;
using Catch::Approx;

namespace {

/// l noisy identity gates with X-flip probability p on |0>.
Circuit x_flip_chain(std::size_t l, double p) {
  Circuit c(1);
  for (std::size_t s = 0; s < l; ++s) {
    c.add_noisy_gate(Gate::identity({0}), StochasticPauliChannel(1, {1 - p, p, 0.0, 0.0}));
  }
  return c;
}

ZnePoint point(double scale, double mean) { return ZnePoint{scale, mean, std::nullopt, 0}; }

}  // namespace

TEST_CASE("raw estimate", "[baselines]") {
  LatticeSpec spec;
  const Circuit empty = build_tfim_trotter(spec, depolarizing_channel(2, 0.0), 0.0);
  const auto r0 = raw_estimate(empty, 100, DiagonalObservable::sz_squared(), RngStream(1, 0));
  CHECK(r0.mean == 1.0);
  CHECK(r0.std_error == 0.0);
  const auto z = DiagonalObservable::z_word("Z");
  const auto r = raw_estimate(x_flip_chain(1, 0.2), 20000, z, RngStream(3, 0));
  CHECK(std::abs(r.mean - 0.6) < 4 * *r.std_error);
  CHECK_FALSE(raw_estimate(x_flip_chain(1, 0.2), 1, z, RngStream(3, 0)).std_error.has_value());
  CHECK(raw_estimate(x_flip_chain(1, 0.2), 1000, z, RngStream(3, 0), 1) ==
        raw_estimate(x_flip_chain(1, 0.2), 1000, z, RngStream(3, 0), 4));
}

TEST_CASE("standard PEC on the single-gate toy", "[baselines][statistical]") {
  const Circuit c = x_flip_chain(1, 0.1);
  const auto q = invert_channel(c.site_channel(0));
  const auto z = DiagonalObservable::z_word("Z");
  CHECK(pec_branch_enumeration(c, q, z) == Approx(1.0).margin(1e-14));
  const auto r = pec_estimate(c, q, 50000, z, RngStream(8, 1));
  CHECK(std::abs(r.mean - 1.0) < 4 * *r.std_error);
  CHECK(r.method == Method::Pec);
  const auto noiseless = x_flip_chain(3, 0.0);
  const auto qi = invert_channel(noiseless.site_channel(0));
  CHECK(pec_estimate(noiseless, qi, 300, z, RngStream(2, 2)).mean ==
        raw_estimate(noiseless, 300, z, RngStream(2, 2)).mean);
}

TEST_CASE("PEC branch enumeration is unbiased", "[baselines][oracle]") {
  std::mt19937_64 gen(64);
  for (unsigned n : {1U, 2U}) {
    for (std::size_t l = 1; l <= 4; ++l) {
      const auto ch = testing::random_channel(n, 0.2, gen);
      const Circuit c = testing::random_circuit_with(n, l, ch, gen);
      const auto q = invert_channel(ch);
      for (const auto& obs : {DiagonalObservable::sz_squared(), DiagonalObservable::z_word(1)}) {
        CHECK(pec_branch_enumeration(c, q, obs) ==
              Approx(exact_noiseless_expectation(c, obs)).margin(1e-10));
      }
    }
  }
}

TEST_CASE("PEC variance overhead on the flip chain", "[baselines][statistical]") {
  const std::size_t l = 20;
  const Circuit c = x_flip_chain(l, 0.01);
  const auto q = invert_channel(c.site_channel(0));
  const auto z = DiagonalObservable::z_word("Z");
  const std::uint64_t M = 100000;
  const auto pec = pec_estimate(c, q, M, z, RngStream(10, 0));
  const auto raw = raw_estimate(c, M, z, RngStream(10, 1));
  const double ratio = *pec.variance_per_shot() / *raw.variance_per_shot();
  const double expected = std::pow(q.overhead(), 2.0 * l);
  CHECK(ratio == Approx(expected).epsilon(0.15));
}

TEST_CASE("PEC overhead overflow is reported", "[baselines]") {
  const Circuit c = x_flip_chain(2000, 0.45);
  const auto q = invert_channel(c.site_channel(0));
  CHECK_THROWS_AS(pec_estimate(c, q, 10, DiagonalObservable::z_word(1), RngStream(1, 1)), NumericError);
}

TEST_CASE("zero-noise fits", "[baselines]") {
  SECTION("flat curve") {
    const auto fit = fit_zero_noise({point(1, 0.7), point(4, 0.7)});
    CHECK(fit.model == ZneModel::Exponential);
    CHECK(fit.extrapolated == Approx(0.7).epsilon(1e-14));
  }
  SECTION("pure exponential") {
    const auto fit = fit_zero_noise({point(1, 0.9), point(4, std::pow(0.9, 4))});
    CHECK(std::abs(fit.extrapolated - 1.0) <= 1e-10);
    const auto three = fit_zero_noise({point(1, 2 * std::exp(-0.3)), point(2, 2 * std::exp(-0.6)),
                                       point(5, 2 * std::exp(-1.5))});
    CHECK(std::abs(three.extrapolated - 2.0) <= 1e-10);
    const auto negative = fit_zero_noise({point(1, -0.9), point(4, -std::pow(0.9, 4))});
    CHECK(std::abs(negative.extrapolated + 1.0) <= 1e-10);
  }
  SECTION("two-point closed form") {
    const double l1 = 1.0, l2 = 3.0, y1 = 0.62, y2 = 0.31;
    const auto fit = fit_zero_noise({point(l1, y1), point(l2, y2)});
    CHECK(fit.extrapolated == Approx(y1 * std::pow(y1 / y2, l1 / (l2 - l1))).epsilon(1e-13));
  }
  SECTION("fallback") {
    const auto sign = fit_zero_noise({point(1, 0.5), point(4, -0.1)});
    CHECK(sign.model == ZneModel::LinearFallback);
    CHECK(sign.extrapolated == Approx(0.5 + 0.6 / 3).epsilon(1e-13));
    CHECK(fit_zero_noise({point(1, 0.5), point(4, 1e-7)}).model == ZneModel::LinearFallback);
  }
  SECTION("error propagation") {
    const auto fit = fit_zero_noise({ZnePoint{1, 0.8, 0.01, 10}, ZnePoint{4, 0.4, 0.02, 10}});
    // A = y1^(4/3) y2^(-1/3); relative errors add in quadrature with those exponents.
    const double rel = std::hypot(4.0 / 3.0 * 0.01 / 0.8, 1.0 / 3.0 * 0.02 / 0.4);
    CHECK(*fit.std_error == Approx(fit.extrapolated * rel).epsilon(1e-12));
  }
  SECTION("invalid input") {
    CHECK_THROWS_AS(fit_zero_noise({point(1, 0.5)}), PreconditionError);
    CHECK_THROWS_AS(fit_zero_noise({point(2, 0.5), point(1, 0.4)}), PreconditionError);
    CHECK_THROWS_AS(fit_zero_noise({point(0.5, 0.5), point(1, 0.4)}), PreconditionError);
  }
}

TEST_CASE("zne_estimate splits shots and round-trips", "[baselines]") {
  const Circuit c = x_flip_chain(5, 0.02);
  const std::vector<double> scales{1.0, 4.0};
  const auto z = DiagonalObservable::z_word("Z");
  const ZneFit fit = zne_estimate(c, scales, 20001, z, RngStream(4, 4));
  REQUIRE(fit.points.size() == 2);
  CHECK(fit.points[0].shots == 10001);
  CHECK(fit.points[1].shots == 10000);
  CHECK(fit.points[0].mean == Approx(std::pow(0.96, 5)).margin(0.02));
  CHECK(std::abs(fit.extrapolated - 1.0) < 0.05);
  CHECK(zne_fit_from_json(to_json(fit)) == fit);
  const auto rep = to_report(fit);
  CHECK(rep.method == Method::Zne);
  CHECK(rep.shots == 20001);
  CHECK_THROWS_AS(zne_estimate(c, std::vector<double>{1.0}, 100, z, RngStream(1, 1)), PreconditionError);
}

TEST_CASE("sampled-order variance gap", "[baselines]") {
  const std::vector<double> p{0.8, 0.2}, s{1, -1}, m{1.0, 0.5};
  CHECK(variance_gap(p, s, m, 1.0) == Approx(0.36).epsilon(1e-13));
  const std::vector<double> aligned{0.7, -0.7};
  CHECK(variance_gap(p, s, aligned, 1.0) == Approx(0.0).margin(1e-15));
  const GammaSeries series(0.1, 0.1, 2);
  const std::vector<double> means{0.9, -0.6, 0.3}, vars{0.1, 0.2, 0.3};
  const auto k0 = sampling_variance_delta(series, 0, means, vars);
  CHECK(k0.delta == 0.0);
  const auto k2 = sampling_variance_delta(series, 2, means, vars);
  CHECK(k2.var_est == Approx(estimator_variance(series, 2, vars)));
  CHECK(k2.var_sampling == Approx(k2.var_est + k2.delta));
  CHECK(k2.delta > 0.0);
  const std::vector<double> alternating{0.6, -0.6, 0.6};
  CHECK(sampling_variance_delta(series, 2, alternating, vars).delta == Approx(0.0).margin(1e-15));
}

TEST_CASE("variance gap is non-negative and matches categorical sampling", "[baselines][property]") {
  std::mt19937_64 gen(1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int t = 0; t < 1000; ++t) {
    const std::size_t K = 1 + gen() % 6;
    std::vector<double> p(K), s(K), m(K);
    for (std::size_t k = 0; k < K; ++k) {
      p[k] = u(gen);
      s[k] = gen() % 2 ? 1.0 : -1.0;
      m[k] = 2 * u(gen) - 1;
    }
    REQUIRE(variance_gap(p, s, m, 1 + u(gen)) >= -1e-12);
  }
  for (int t = 0; t < 3; ++t) {
    const std::vector<double> p{0.5 + 0.1 * t, 0.3, 0.2 - 0.05 * t};
    const std::vector<double> s{1, -1, 1}, m{0.9, 0.4 + 0.1 * t, -0.3};
    const double norm = 1.7;
    std::discrete_distribution<int> pick(p.begin(), p.end());
    double sum = 0.0, sq = 0.0;
    const int draws = 200000;
    for (int i = 0; i < draws; ++i) {
      const int k = pick(gen);
      const double v = norm * s[k] * m[k];
      sum += v;
      sq += v * v;
    }
    const double mc = sq / draws - (sum / draws) * (sum / draws);
    CHECK(mc == Approx(variance_gap(p, s, m, norm)).epsilon(0.05));
  }
}
