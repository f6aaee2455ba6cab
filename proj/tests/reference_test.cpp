// Copyright 2026 The chainless Authors
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

#include "chainless/reference.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <vector>

namespace chainless {
namespace {

TEST(Oracle, ProbabilitiesAreNormalized) {
  const auto c = draw_disorder(3, Lattice{2, 4}, 1.3);
  const EnumerationOracle o{c};
  EXPECT_EQ(o.num_states(), 1U << 16U);
  double total = 0.0;
  std::size_t visits = 0;
  o.for_each([&](std::uint32_t st, std::span<const std::int8_t> s, double p) {
    total += p;
    ++visits;
    EXPECT_EQ(EnumerationOracle::state_of(s), st);
  });
  EXPECT_EQ(visits, o.num_states());
  EXPECT_NEAR(total, 1.0, 1e-12);
  EXPECT_THROW((EnumerationOracle{CouplingField::uniform(Lattice{2, 8}, 1.0)}), std::invalid_argument);
}

TEST(Oracle, IndependentBruteForceOnFourByFour) {
  // Direct loop over 2^16 states without the Gray-code walk.
  const Lattice l{2, 4};
  const auto c = CouplingField::uniform(l, 1.0 / 2.2);
  const EnumerationOracle o{c};
  double z = 0.0;
  double num = 0.0;
  for (std::uint32_t st = 0; st < (1U << 16U); ++st) {
    SpinConfiguration s{16};
    for (SiteId i = 0; i < 16; ++i) {
      s[i] = ((st >> static_cast<unsigned>(i)) & 1U) != 0 ? 1 : -1;
    }
    double e = 0.0;
    for (SiteId i = 0; i < 16; ++i) {
      e += s[i] * (s[l.forward(i, 0)] + s[l.forward(i, 1)]);
    }
    const double w = std::exp(e / 2.2);
    z += w;
    num += w * std::abs(magnetization(s));
  }
  EXPECT_NEAR(o.log_partition(), std::log(z), 1e-10);
  EXPECT_NEAR(exact_expectation(o, [](auto s) { return std::abs(magnetization(s)); }), num / z, 1e-12);
  EXPECT_NEAR(num / z, 0.865532, 5e-6);
}

TEST(Metropolis, TwoByTwoMatchesEnumeration) {
  const Lattice l{2, 2};
  const auto c = CouplingField::uniform(l, 0.3);
  const EnumerationOracle o{c};
  MetropolisChain chain{c, 21};
  std::vector<double> counts(o.num_states(), 0.0);
  const int n = 40000;
  for (int k = 0; k < 200; ++k) {
    chain.sweep();
  }
  for (int k = 0; k < n; ++k) {
    for (int t = 0; t < 5; ++t) {
      chain.sweep();
    }
    counts[EnumerationOracle::state_of(chain.state().values())] += 1.0;
  }
  double chi2 = 0.0;
  for (std::uint32_t st = 0; st < o.num_states(); ++st) {
    const double e = n * std::exp(o.log_probability(st));
    chi2 += (counts[st] - e) * (counts[st] - e) / e;
  }
  EXPECT_LT(chi2, 37.7);  // chi-square, 15 dof, p = 0.001
}

TEST(Metropolis, InfiniteTemperatureAcceptsEverything) {
  const auto c = CouplingField::uniform(Lattice{2, 8}, 0.0);
  MetropolisChain chain{c, 1};
  double mu = 0.0;
  for (int k = 0; k < 2000; ++k) {
    chain.sweep();
    mu += magnetization(chain.state());
  }
  EXPECT_DOUBLE_EQ(chain.acceptance_rate(), 1.0);
  EXPECT_NEAR(mu / 2000.0, 0.0, 3.0 / 8.0 / std::sqrt(2000.0) * 3.0);
}

TEST(Metropolis, ReproducibleFromSeed) {
  const auto c = draw_disorder(5, Lattice{3, 4}, 1.0);
  std::vector<double> a;
  std::vector<double> b;
  metropolis_chain(c, 50, 10, 77, [&](std::size_t, const SpinConfiguration& s) { a.push_back(magnetization(s)); });
  metropolis_chain(c, 50, 10, 77, [&](std::size_t, const SpinConfiguration& s) { b.push_back(magnetization(s)); });
  EXPECT_EQ(a.size(), 50U);
  EXPECT_EQ(a, b);
}

TEST(Ladder, GeometricAndMerged) {
  const auto t = geometric_ladder(0.5, 2.0, 3);
  ASSERT_EQ(t.size(), 3U);
  EXPECT_DOUBLE_EQ(t.front(), 0.5);
  EXPECT_NEAR(t[1], 1.0, 1e-12);
  EXPECT_DOUBLE_EQ(t.back(), 2.0);
  const std::vector<double> extra{0.9, 1.0, 1.5};
  const auto m = merge_ladder(t, extra);
  EXPECT_EQ(m, (std::vector<double>{0.5, 0.9, 1.0, 1.5, 2.0}));
  EXPECT_THROW((void)geometric_ladder(1.0, 0.5, 3), std::invalid_argument);
}

// Exact overlap moments of two independent replicas.
std::pair<double, double> exact_overlap(const EnumerationOracle& o) {
  std::vector<double> p(o.num_states());
  for (std::uint32_t s = 0; s < o.num_states(); ++s) {
    p[s] = std::exp(o.log_probability(s));
  }
  double q2 = 0.0;
  double q4 = 0.0;
  const auto m = static_cast<int>(std::log2(static_cast<double>(o.num_states())));
  for (std::uint32_t a = 0; a < o.num_states(); ++a) {
    for (std::uint32_t b = 0; b < o.num_states(); ++b) {
      const double q = (m - 2.0 * std::popcount(a ^ b)) / m;
      q2 += p[a] * p[b] * q * q;
      q4 += p[a] * p[b] * q * q * q * q;
    }
  }
  return {q2, q4};
}

TEST(Tempering, OverlapMomentsMatchEnumeration) {
  const auto c = draw_disorder(13, Lattice{2, 3}, 1.0);
  TemperingConfig config;
  config.temperatures = geometric_ladder(0.6, 2.5, 6);
  config.sweeps = 30000;
  config.burn_in = 2000;
  config.seed = 3;
  const auto r = parallel_tempering(c, config);
  ASSERT_EQ(r.moments.size(), 6U);
  ASSERT_EQ(r.swap_acceptance.size(), 5U);
  for (double a : r.swap_acceptance) {
    EXPECT_GT(a, 0.05);
    EXPECT_LE(a, 1.0);
  }
  for (std::size_t k = 0; k < r.temperatures.size(); ++k) {
    const EnumerationOracle o{c.with_beta(1.0 / r.temperatures[k])};
    const auto [q2, q4] = exact_overlap(o);
    EXPECT_NEAR(r.moments[k].q2, q2, 0.03) << "T=" << r.temperatures[k];
    EXPECT_NEAR(r.moments[k].q4, q4, 0.03) << "T=" << r.temperatures[k];
  }
}

}  // namespace
}  // namespace chainless
