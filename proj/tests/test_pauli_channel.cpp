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

#include "fpec/channel.hpp"
#include "fpec/density_matrix.hpp"
#include "fpec/pauli.hpp"
#include "test_support.hpp"

using namespace fpec;
using Catch::Approx;

namespace {

std::vector<double> oracle_ptm_diagonal(const StochasticPauliChannel& ch) {
  const auto ptm = testing::kraus_ptm(ch.arity(), testing::channel_terms(ch));
  std::vector<double> d(ptm.rows());
  for (int i = 0; i < ptm.rows(); ++i) d[i] = ptm(i, i);
  return d;
}

DensityMatrix random_density_matrix(unsigned n, std::mt19937_64& gen) {
  std::normal_distribution<double> g;
  const std::size_t dim = std::size_t{1} << n;
  DensityMatrix out(n);
  out.set_zero();
  for (int mix = 0; mix < 3; ++mix) {
    std::vector<kernels::Amplitude> psi(dim);
    double norm = 0.0;
    for (auto& a : psi) {
      a = {g(gen), g(gen)};
      norm += std::norm(a);
    }
    for (auto& a : psi) a /= std::sqrt(norm);
    out.add_scaled(DensityMatrix::from_pure(psi), 1.0 / 3.0);
  }
  return out;
}

}  // namespace

TEST_CASE("Pauli words parse, index and commute", "[pauli]") {
  const PauliString xz = PauliString::parse("XZ");
  CHECK(xz.size() == 2);
  CHECK(xz[0] == Pauli::X);
  CHECK(xz[1] == Pauli::Z);
  CHECK(xz.index() == 1 + 3 * 4);
  CHECK(PauliString::from_index(2, xz.index()) == xz);
  CHECK(xz.str() == "XZ");
  CHECK(PauliString(3).index() == 0);
  CHECK(PauliString::parse("III") == PauliString(3));
  CHECK_FALSE(PauliString::parse("XI") == PauliString(2));
  CHECK(PauliString::parse("XX").commutes_with(PauliString::parse("ZZ")));
  CHECK_FALSE(PauliString::parse("XI").commutes_with(PauliString::parse("ZI")));
  CHECK(PauliString::parse("YZX").weight() == 3);
  CHECK(PauliString::parse("YIY").y_count() == 2);
  CHECK_THROWS_AS(PauliString::parse("XQ"), PreconditionError);
  for (std::uint64_t i = 0; i < 64; ++i) {
    CHECK(PauliString::from_index(3, i).index() == i);
  }
}

TEST_CASE("commutation signs agree with dense matrices", "[pauli]") {
  for (const auto& a : testing::all_words(2)) {
    for (const auto& b : testing::all_words(2)) {
      const auto pa = testing::dense_pauli(a), pb = testing::dense_pauli(b);
      const bool commute = (pa * pb - pb * pa).norm() < 1e-12;
      CHECK(PauliString::parse(a).commutes_with(PauliString::parse(b)) == commute);
    }
  }
}

TEST_CASE("ptm_diagonal matches the Kraus superoperator", "[channel]") {
  SECTION("identity channel") {
    const auto d = ptm_diagonal(StochasticPauliChannel::identity(2));
    for (double e : d.entries) CHECK(e == 1.0);
  }
  SECTION("X flip") {
    const StochasticPauliChannel ch(1, {0.9, 0.1, 0.0, 0.0});
    const auto d = ptm_diagonal(ch);
    const auto ref = oracle_ptm_diagonal(ch);
    const std::vector<double> expected{1.0, 1.0, 0.8, 0.8};
    for (int i = 0; i < 4; ++i) {
      CHECK(d.entries[i] == Approx(expected[i]).margin(1e-14));
      CHECK(ref[i] == Approx(expected[i]).margin(1e-14));
    }
  }
  SECTION("single-qubit depolarizing") {
    const auto ch = depolarizing_channel(1, 0.1);
    const auto d = ptm_diagonal(ch);
    const auto ref = oracle_ptm_diagonal(ch);
    CHECK(d.entries[0] == 1.0);
    for (int i = 1; i < 4; ++i) {
      CHECK(d.entries[i] == Approx(13.0 / 15.0).margin(1e-14));
      CHECK(ref[i] == Approx(13.0 / 15.0).margin(1e-14));
    }
  }
  SECTION("random two-qubit channels, off-diagonal PTM vanishes") {
    std::mt19937_64 gen(11);
    for (int t = 0; t < 20; ++t) {
      const auto ch = testing::random_channel(2, 0.25, gen);
      const auto ptm = testing::kraus_ptm(2, testing::channel_terms(ch));
      const auto d = ptm_diagonal(ch);
      for (int i = 0; i < 16; ++i) {
        for (int j = 0; j < 16; ++j) {
          CHECK(ptm(i, j) == Approx(i == j ? d.entries[i] : 0.0).margin(1e-13));
        }
      }
    }
  }
}

TEST_CASE("invert_channel worked examples", "[channel]") {
  SECTION("identity") {
    const auto q = invert_channel(StochasticPauliChannel::identity(1));
    CHECK(q.eps1() == 0.0);
    CHECK(q.eps2() == 0.0);
    CHECK(q.terms().empty());
  }
  SECTION("X flip") {
    const auto q = invert_channel(StochasticPauliChannel(1, {0.9, 0.1, 0.0, 0.0}));
    CHECK(q.eps1() == Approx(0.125).epsilon(1e-13));
    CHECK(q.eps2() == Approx(0.125).epsilon(1e-13));
    REQUIRE(q.terms().size() == 1);
    CHECK(q.terms()[0].pauli.str() == "X");
    CHECK(q.terms()[0].coefficient == Approx(1.0).epsilon(1e-13));
  }
  SECTION("depolarizing") {
    const auto q = invert_channel(depolarizing_channel(1, 0.1));
    CHECK(q.eps1() == Approx(3.0 / 26.0).epsilon(1e-13));
    CHECK(q.eps2() == Approx(3.0 / 26.0).epsilon(1e-13));
    REQUIRE(q.terms().size() == 3);
    for (const auto& t : q.terms()) CHECK(t.coefficient == Approx(1.0 / 3.0).epsilon(1e-13));
    const auto d = ptm_diagonal(q.as_mixture());
    CHECK(d.entries[0] == Approx(1.0).epsilon(1e-13));
    for (int i = 1; i < 4; ++i) CHECK(d.entries[i] == Approx(15.0 / 13.0).epsilon(1e-13));
  }
  SECTION("singular channel") {
    CHECK_THROWS_AS(invert_channel(StochasticPauliChannel(1, {0.5, 0.5, 0.0, 0.0})),
                    NonInvertibleChannelError);
  }
}

TEST_CASE("depolarizing_channel splits the error uniformly", "[channel]") {
  const auto zero = depolarizing_channel(1, 0.0);
  CHECK(zero.is_identity());
  const auto two = depolarizing_channel(2, 0.15);
  CHECK(two.probability(0) == Approx(0.85));
  for (std::uint64_t i = 1; i < 16; ++i) CHECK(two.probability(i) == Approx(0.01).epsilon(1e-14));
  CHECK_THROWS_AS(depolarizing_channel(1, 1.0), PreconditionError);
  CHECK_THROWS_AS(depolarizing_channel(1, -0.1), PreconditionError);
}

TEST_CASE("channel construction validates probabilities", "[channel]") {
  CHECK_THROWS_AS(StochasticPauliChannel(1, {0.9, 0.2, 0.0, 0.0}), PreconditionError);
  CHECK_THROWS_AS(StochasticPauliChannel(1, {1.1, -0.1, 0.0, 0.0}), PreconditionError);
  CHECK_THROWS_AS(StochasticPauliChannel(1, {1.0, 0.0}), PreconditionError);
  const StochasticPauliChannel nearly(1, {0.9 + 4e-13, 0.1, 0.0, 0.0});
  double sum = 0.0;
  for (double p : nearly.probabilities()) sum += p;
  CHECK(sum == Approx(1.0).margin(1e-15));
  const std::vector<std::pair<PauliString, double>> entries{{PauliString::parse("XI"), 0.01},
                                                            {PauliString::parse("ZZ"), 0.02}};
  const auto inferred = StochasticPauliChannel::from_entries(2, entries, true);
  CHECK(inferred.probability(0) == Approx(0.97));
  CHECK_THROWS_AS(StochasticPauliChannel::from_entries(2, entries, false), PreconditionError);
}

TEST_CASE("channels act on density matrices", "[channel][density]") {
  std::mt19937_64 gen(5);
  SECTION("identity leaves the state unchanged") {
    const auto rho = random_density_matrix(2, gen);
    const auto out = apply_channel_to_density_matrix(StochasticPauliChannel::identity(2), rho);
    for (std::size_t i = 0; i < rho.data().size(); ++i) CHECK(std::abs(out.data()[i] - rho.data()[i]) < 1e-15);
  }
  SECTION("symmetric X flip mixes |0><0|") {
    const auto out = apply_channel_to_density_matrix(
        StochasticPauliChannel(1, {0.5, 0.5, 0.0, 0.0}), DensityMatrix(1));
    CHECK(out(0, 0).real() == Approx(0.5));
    CHECK(out(1, 1).real() == Approx(0.5));
    CHECK(std::abs(out(0, 1)) < 1e-15);
  }
  SECTION("inverse undoes the channel") {
    const StochasticPauliChannel ch(1, {0.9, 0.1, 0.0, 0.0});
    const auto q = invert_channel(ch);
    for (int t = 0; t < 10; ++t) {
      const auto rho = random_density_matrix(1, gen);
      const auto back = apply_channel_to_density_matrix(q, apply_channel_to_density_matrix(ch, rho));
      for (std::size_t i = 0; i < rho.data().size(); ++i) {
        CHECK(std::abs(back.data()[i] - rho.data()[i]) < 1e-12);
      }
      CHECK(back.trace() == Approx(1.0).margin(1e-12));
      CHECK(back.is_hermitian());
    }
  }
  SECTION("local channel on a larger register matches the dense oracle") {
    const auto ch = testing::random_channel(2, 0.2, gen);
    const auto rho = random_density_matrix(3, gen);
    const std::vector<unsigned> support{2, 0};
    const auto out = apply_channel_to_density_matrix(ch, rho, support);
    testing::CMat dense(8, 8), expected = testing::CMat::Zero(8, 8);
    for (int r = 0; r < 8; ++r)
      for (int c = 0; c < 8; ++c) dense(r, c) = rho(r, c);
    for (std::uint64_t i = 0; i < 16; ++i) {
      const auto local = PauliString::from_index(2, i).str();
      std::string word = "III";
      word[2] = local[0];
      word[0] = local[1];
      const auto p = testing::dense_pauli(word);
      expected += ch.probability(i) * p * dense * p;
    }
    for (int r = 0; r < 8; ++r)
      for (int c = 0; c < 8; ++c) CHECK(std::abs(out(r, c) - expected(r, c)) < 1e-14);
  }
  SECTION("dimension mismatch") {
    CHECK_THROWS_AS(apply_channel_to_density_matrix(depolarizing_channel(2, 0.1), DensityMatrix(1)),
                    PreconditionError);
  }
}

TEST_CASE("inversion properties over random channels", "[channel][property]") {
  std::mt19937_64 gen(2026);
  std::uniform_real_distribution<double> eps_dist(0.0, 0.3);
  for (int t = 0; t < 1000; ++t) {
    const unsigned n = 1 + static_cast<unsigned>(t % 2);
    const auto ch = testing::random_channel(n, eps_dist(gen), gen);
    const auto q = invert_channel(ch);
    const auto fwd = ptm_diagonal(ch).entries;
    const auto inv = ptm_diagonal(q.as_mixture()).entries;
    for (std::size_t i = 0; i < fwd.size(); ++i) REQUIRE(std::abs(fwd[i] * inv[i] - 1.0) <= 1e-10);
    double abs_sum = 0.0, sum = 0.0;
    for (const auto& term : q.terms()) {
      abs_sum += std::abs(term.coefficient);
      sum += term.coefficient;
      REQUIRE(term.pauli.index() != 0);
    }
    if (!q.terms().empty()) REQUIRE(std::abs(abs_sum - 1.0) <= 1e-12);
    REQUIRE(std::abs(1.0 + q.eps1() - q.eps2() * sum - 1.0) <= 1e-12);
    const auto back = mixture_from_ptm(ptm_diagonal(ch));
    for (std::size_t i = 0; i < fwd.size(); ++i) REQUIRE(std::abs(back.weight(i) - ch.probability(i)) <= 1e-12);
  }
}

TEST_CASE("weak depolarizing inverse is first order in eps", "[channel][property]") {
  for (double eps : {1e-4, 1e-3, 1e-2, 0.05}) {
    for (unsigned n : {1U, 2U}) {
      const auto q = invert_channel(depolarizing_channel(n, eps));
      CHECK(std::abs(q.eps1() - eps) <= 5 * eps * eps);
      CHECK(std::abs(q.eps2() - eps) <= 5 * eps * eps);
    }
  }
}

TEST_CASE("replacement-form inverse of uniform depolarizing noise", "[channel]") {
  const auto ch = depolarizing_channel(2, 0.05);
  const auto q = replacement_inverse(ch);
  const double p = 0.05 * 16.0 / 15.0;
  CHECK(q.eps1() == Approx(p / (1 - p)));
  CHECK(q.eps2() == Approx(p / (1 - p)));
  CHECK(q.terms().size() == 16);
  const auto fwd = ptm_diagonal(ch).entries;
  const auto inv = ptm_diagonal(q.as_mixture()).entries;
  for (std::size_t i = 0; i < fwd.size(); ++i) CHECK(fwd[i] * inv[i] == Approx(1.0).epsilon(1e-12));
  CHECK_THROWS_AS(replacement_inverse(StochasticPauliChannel(1, {0.9, 0.1, 0.0, 0.0})), PreconditionError);
}
