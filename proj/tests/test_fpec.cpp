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
#include "fpec/fpec.hpp"
#include "fpec/oracle.hpp"
#include "test_support.hpp"

using namespace fpec;
using Catch::Approx;

namespace {

Circuit x_flip_toy(double p) {
  Circuit c(1);
  c.add_noisy_gate(Gate::identity({0}), StochasticPauliChannel(1, {1 - p, p, 0.0, 0.0}));
  return c;
}

/// Gate layers followed by a whole-register depolarizing site.
Circuit global_depolarizing_circuit(unsigned n, std::size_t layers, double eps, std::mt19937_64& gen) {
  std::uniform_real_distribution<double> angle(-3, 3);
  std::vector<double> init(n);
  for (double& a : init) a = angle(gen);
  Circuit c(n, init);
  std::vector<unsigned> all(n);
  for (unsigned q = 0; q < n; ++q) all[q] = q;
  const auto ch = depolarizing_channel(n, eps);
  for (std::size_t s = 0; s < layers; ++s) {
    for (unsigned q = 0; q < n; ++q) c.add_gate(Gate::rx(q, angle(gen)));
    if (n > 1) c.add_gate(Gate::rzz(0, n - 1, angle(gen)));
    c.add_noisy_gate(Gate::identity(all), ch);
  }
  return c;
}

}  // namespace

TEST_CASE("single-qubit toy: exact per-order values", "[fpec][oracle]") {
  const Circuit c = x_flip_toy(0.1);
  const auto q = invert_channel(c.site_channel(0));
  const auto z = DiagonalObservable::z_word("Z");
  const auto orders = exact_order_expectations(c, q, 1, z);
  CHECK(orders[0] == Approx(0.8).margin(1e-14));
  CHECK(orders[1] == Approx(-0.8).margin(1e-14));
  CHECK(exact_fpec_value(c, q, 1, z) == Approx(1.0).margin(1e-14));
  CHECK(exact_fpec_value(c, q, 0, z) == Approx(0.9).margin(1e-14));
}

TEST_CASE("single-qubit toy: sampled order values", "[fpec][statistical]") {
  const Circuit c = x_flip_toy(0.1);
  const auto q = invert_channel(c.site_channel(0));
  const auto z = DiagonalObservable::z_word("Z");
  const RngStream rng(42, 0);
  const SampleStats k1 = estimate_order_k(c, q, 1, 20000, z, rng);
  CHECK(std::abs(k1.mean + 0.8) < 4 * std::sqrt(k1.variance / 20000));
  const SampleStats k0 = estimate_order_k(c, q, 0, 20000, z, rng.substream(1));
  CHECK(std::abs(k0.mean - 0.8) < 4 * std::sqrt(k0.variance / 20000));
  const SampleStats one = estimate_order_k(c, q, 0, 1, z, rng);
  CHECK(one.variance == 0.0);
  CHECK_THROWS_AS(estimate_order_k(c, q, 2, 10, z, rng), PreconditionError);
  CHECK_THROWS_AS(estimate_order_k(c, q, 0, 0, z, rng), PreconditionError);
}

TEST_CASE("polynomial recursion agrees with subset enumeration", "[fpec][oracle]") {
  std::mt19937_64 gen(77);
  for (unsigned n : {1U, 2U, 3U}) {
    const unsigned arity = n == 1 ? 1 : 2;
    const auto ch = testing::random_channel(arity, 0.2, gen);
    const Circuit c = testing::random_circuit_with(n, 5, ch, gen);
    const auto q = invert_channel(ch);
    const auto obs = DiagonalObservable::z_prefix_average();
    const auto orders = exact_order_expectations(c, q, 5, obs);
    for (std::size_t k = 0; k <= 5; ++k) {
      CHECK(orders[k] == Approx(enumerate_order_expectation(c, q, k, obs)).margin(1e-12));
    }
    if (n <= 2) {
      CHECK(orders[2] ==
            Approx(enumerate_order_expectation(c, q, 2, obs, ExactMode::Superoperator)).margin(1e-12));
    }
  }
}

TEST_CASE("binomial expansion reproduces the ideal superoperator", "[fpec][oracle]") {
  std::mt19937_64 gen(5);
  for (unsigned n : {1U, 2U}) {
    for (std::size_t l = 1; l <= 4; ++l) {
      for (int t = 0; t < 5; ++t) {
        const auto ch = testing::random_channel(n, 0.3 * (t + 1) / 5.0, gen);
        const Circuit c = testing::random_circuit_with(n, l, ch, gen);
        const auto q = invert_channel(ch);
        const RealMatrix expanded = binomial_expansion_superoperator(c, q);
        const RealMatrix ideal = circuit_ptm(c.noiseless(), {});
        REQUIRE((expanded - ideal).cwiseAbs().maxCoeff() <= 1e-10);
      }
    }
  }
}

TEST_CASE("full expansion is unbiased and truncation respects the bound", "[fpec][oracle][property]") {
  std::mt19937_64 gen(99);
  for (unsigned n = 1; n <= 4; ++n) {
    for (int t = 0; t < 4; ++t) {
      const unsigned arity = n == 1 ? 1 : 2;
      const std::size_t l = 3 + gen() % 5;
      const auto ch = testing::random_channel(arity, 0.05 + 0.05 * t, gen);
      const Circuit c = testing::random_circuit_with(n, l, ch, gen);
      const auto q = invert_channel(ch);
      const GammaSeries series = gamma_series(q.eps1(), q.eps2(), l);
      REQUIRE(series.max_order() == l);
      for (const auto& obs : {DiagonalObservable::sz_squared(), DiagonalObservable::z_prefix_average(),
                              DiagonalObservable::z_word(1)}) {
        const double ideal = exact_noiseless_expectation(c, obs);
        const auto orders = exact_order_expectations(c, q, l, obs);
        double acc = 0.0;
        for (std::size_t K = 0; K <= l; ++K) {
          acc += series.gamma(K) * orders[K];
          CHECK(std::abs(acc - ideal) <= obs.norm() * series.tail(K) + 1e-12);
        }
        CHECK(acc == Approx(ideal).margin(1e-10));
      }
    }
  }
}

TEST_CASE("global depolarizing noise leaves only the zeroth order", "[fpec][oracle]") {
  std::mt19937_64 gen(123);
  for (unsigned n = 1; n <= 4; ++n) {
    const Circuit c = global_depolarizing_circuit(n, 4, 0.05, gen);
    const auto q = replacement_inverse(c.site_channel(0));
    const auto obs = DiagonalObservable::z_word((std::uint64_t{1} << n) - 1);
    const auto orders = exact_order_expectations(c, q, 3, obs);
    for (std::size_t k = 1; k <= 3; ++k) CHECK(std::abs(orders[k]) <= 1e-10);
    CHECK(q.overhead() == Approx(1 + 2 * q.eps1()));
    const GammaSeries series = gamma_series(q.eps1(), q.eps2(), c.num_sites());
    CHECK(series.gamma(0) * orders[0] == Approx(exact_noiseless_expectation(c, obs)).margin(1e-10));
  }
}

TEST_CASE("fpec_estimate on a noiseless circuit reduces to raw sampling", "[fpec]") {
  std::mt19937_64 gen(3);
  const auto ch = StochasticPauliChannel::identity(2);
  const Circuit c = testing::random_circuit_with(3, 4, ch, gen);
  const auto q = invert_channel(ch);
  const auto obs = DiagonalObservable::sz_squared();
  const RngStream rng(1, 2);
  const EstimatorReport r = fpec_estimate(c, q, 500, TruncationPolicy::bias_tolerance(1e-3), obs, rng);
  CHECK(r.K == 0u);
  CHECK(r.bias_bound == 0.0);
  CHECK(r.per_k.size() == 1);
  const EstimatorReport raw = raw_estimate(c, 500, obs, rng.substream(0));
  CHECK(r.mean == raw.mean);
}

TEST_CASE("fpec_estimate bookkeeping and determinism", "[fpec]") {
  LatticeSpec spec{2, 2, 1.0, 2.0, 0.2, 2};
  const auto ch = depolarizing_channel(2, 0.02);
  const Circuit c = build_tfim_trotter(spec, ch, 0.5);
  const auto q = invert_channel(ch);
  const auto obs = DiagonalObservable::sz_squared();
  const RngStream rng(2026, 7);
  const EstimatorReport a = fpec_estimate(c, q, 4000, TruncationPolicy::shot_limited(), obs, rng, 1);
  const EstimatorReport b = fpec_estimate(c, q, 4000, TruncationPolicy::shot_limited(), obs, rng, 3);
  CHECK(a == b);
  REQUIRE(a.K.has_value());
  CHECK(*a.K >= 1);
  double mean = 0.0, var = 0.0;
  std::uint64_t total = 0;
  for (const auto& o : a.per_k) {
    mean += o.gamma * o.mean;
    var += o.gamma * o.gamma * o.variance / static_cast<double>(o.shots);
    total += o.shots;
  }
  CHECK(total == 4000);
  CHECK(a.mean == Approx(mean).epsilon(1e-14));
  CHECK(*a.std_error == Approx(std::sqrt(var)).epsilon(1e-14));
  const double ideal = exact_noiseless_expectation(c, obs);
  CHECK(std::abs(a.mean - ideal) <= a.bias_bound + 4 * *a.std_error);
  const EstimatorReport fixed = fpec_estimate(c, q, 4000, TruncationPolicy::fixed_order(1), obs, rng);
  CHECK(fixed.K == 1u);
  const auto back = report_from_json(to_json(a));
  CHECK(back == a);
}

TEST_CASE("fpec_estimate recovers the toy's noiseless value", "[fpec][statistical]") {
  const Circuit c = x_flip_toy(0.1);
  const auto q = invert_channel(c.site_channel(0));
  const auto z = DiagonalObservable::z_word("Z");
  const EstimatorReport r = fpec_estimate(c, q, 50000, TruncationPolicy::shot_limited(), z, RngStream(5, 5));
  CHECK(r.K == 1u);
  CHECK(r.bias_bound == 0.0);
  CHECK(std::abs(r.mean - 1.0) < 4 * *r.std_error);
}

TEST_CASE("inverse arity must match the noise sites", "[fpec]") {
  const Circuit c = x_flip_toy(0.1);
  const auto q = invert_channel(depolarizing_channel(2, 0.1));
  CHECK_THROWS_AS(fpec_estimate(c, q, 100, TruncationPolicy::shot_limited(), DiagonalObservable::z_word(1),
                                RngStream(1, 1)),
                  PreconditionError);
}
