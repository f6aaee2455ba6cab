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

#include "chainless/sampler.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "chainless/estimator.hpp"
#include "chainless/reference.hpp"

namespace chainless {
namespace {

TEST(BaseDistribution, RestrictionKeepsNonNegativeSums) {
  std::vector<SiteId> sites(16);
  for (int k = 0; k < 16; ++k) {
    sites[static_cast<std::size_t>(k)] = k;
  }
  const std::vector<double> flat(1U << 16U, 0.0);
  const BaseLevelDistribution d{sites, flat, true};
  std::size_t support = 0;
  double total = 0.0;
  for (std::uint32_t s = 0; s < d.num_states(); ++s) {
    if (std::isfinite(d.log_probability(s))) {
      ++support;
      total += std::exp(d.log_probability(s));
    }
  }
  // Half of the 2^16 states plus half of the C(16, 8) zero-sum states.
  EXPECT_EQ(support, (65536U + 12870U) / 2U);
  EXPECT_NEAR(total, 1.0, 1e-12);
  EXPECT_NEAR(d.log_probability(0xFFFFU), -std::log(39203.0), 1e-12);
}

TEST(BaseDistribution, StateEncodingRoundTrips) {
  const std::vector<SiteId> sites{3, 0, 7};
  const std::vector<double> lw{0, 1, 2, 3, 4, 5, 6, 7};
  const BaseLevelDistribution d{sites, lw, false};
  std::vector<std::int8_t> spins(8, -1);
  for (std::uint32_t s = 0; s < 8; ++s) {
    d.assign(s, spins);
    EXPECT_EQ(d.state_of(spins), s);
  }
  d.assign(1, spins);
  EXPECT_EQ(spins[3], 1);
  EXPECT_EQ(spins[0], -1);
}

TEST(BaseDistribution, SamplingFrequencies) {
  const std::vector<SiteId> sites{0, 1};
  const std::vector<double> lw{std::log(1.0), std::log(2.0), std::log(3.0), std::log(4.0)};
  const BaseLevelDistribution d{sites, lw, false};
  Rng rng{5};
  std::vector<int> counts(4, 0);
  const int n = 100000;
  for (int k = 0; k < n; ++k) {
    ++counts[d.sample(rng)];
  }
  double chi2 = 0.0;
  for (int s = 0; s < 4; ++s) {
    const double e = n * (s + 1) / 10.0;
    chi2 += (counts[static_cast<std::size_t>(s)] - e) * (counts[static_cast<std::size_t>(s)] - e) / e;
  }
  EXPECT_LT(chi2, 16.3);  // chi-square, 3 dof, p = 0.001
}

class FourByFour : public ::testing::Test {
 protected:
  LevelHierarchy h = build_hierarchy_2d(4, 4);
  CouplingField c = CouplingField::uniform(h.lattice(), 1.0 / 2.2);
  std::vector<BasisSet> bases = sampling_bases(h);
  CoefficientTable table{bases, 0.3};
};

TEST_F(FourByFour, SamplerIsNormalizedOverAllStates) {
  const ChainlessSampler sampler{h, c, table, false};
  const EnumerationOracle oracle{c};
  double total = 0.0;
  oracle.for_each([&](std::uint32_t st, std::span<const std::int8_t>, double) {
    total += std::exp(sampler.log_probability(oracle.configuration(st)));
  });
  EXPECT_NEAR(total, 1.0, 1e-12);
}

TEST_F(FourByFour, DrawReportsItsOwnProbability) {
  const ChainlessSampler sampler{h, c, table, false};
  for (const auto& s : draw_samples(sampler, 9, StreamDomain::kTest, 0, 0, 50)) {
    EXPECT_NEAR(s.log_p0, sampler.log_probability(s.spins), 1e-12);
    EXPECT_NEAR(s.log_weight, log_density_unnormalized(s.spins, c) - s.log_p0, 1e-12);
  }
}

TEST_F(FourByFour, SampledMomentsMatchSamplerDensity) {
  const ChainlessSampler sampler{h, c, table, false};
  const EnumerationOracle oracle{c};
  double exact = 0.0;
  oracle.for_each([&](std::uint32_t st, std::span<const std::int8_t> s, double) {
    const double mu = magnetization(s);
    exact += std::exp(sampler.log_probability(oracle.configuration(st))) * mu * mu;
  });
  ObservableAccumulator acc;
  for (const auto& s : draw_samples(sampler, 4, StreamDomain::kTest, 0, 0, 20000, 4)) {
    const double mu = magnetization(s.spins);
    acc.add(1.0, mu * mu);
  }
  EXPECT_NEAR(acc.mean(), exact, 4.0 * acc.error());
}

TEST_F(FourByFour, RestrictedSamplerNeverDrawsNegativeBase) {
  const ChainlessSampler sampler{h, c, table, true};
  for (const auto& s : draw_samples(sampler, 1, StreamDomain::kTest, 0, 0, 500)) {
    int sum = 0;
    for (SiteId b : h.base().sites) {
      sum += s.spins[b];
    }
    EXPECT_GE(sum, 0);
  }
}

TEST(Sampler, DrawsDoNotDependOnThreadsOrSplits) {
  const auto h = build_hierarchy_2d(16);
  const auto c = CouplingField::uniform(h.lattice(), 1.0 / 2.2);
  const auto bases = sampling_bases(h);
  const ChainlessSampler sampler{h, c, CoefficientTable{bases, 0.2}, true};
  const auto a = draw_samples(sampler, 77, StreamDomain::kEvaluation, 0, 0, 64, 1);
  const auto b = draw_samples(sampler, 77, StreamDomain::kEvaluation, 0, 0, 64, 8);
  const auto tail = draw_samples(sampler, 77, StreamDomain::kEvaluation, 0, 32, 32, 3);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].spins, b[i].spins);
    EXPECT_EQ(a[i].log_weight, b[i].log_weight);
  }
  for (std::size_t i = 0; i < tail.size(); ++i) {
    EXPECT_EQ(tail[i].spins, a[32 + i].spins);
  }
  const auto other = draw_samples(sampler, 78, StreamDomain::kEvaluation, 0, 0, 64, 1);
  int same = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    same += static_cast<int>(a[i].spins == other[i].spins);
  }
  EXPECT_LT(same, 4);
}

TEST(Sampler, ZeroTableAtInfiniteTemperatureIsUniform) {
  const auto h = build_hierarchy_2d(8);
  const auto c = CouplingField::uniform(h.lattice(), 0.0);
  const auto bases = sampling_bases(h);
  const ChainlessSampler sampler{h, c, CoefficientTable{bases, 0.0}, false};
  auto samples = draw_samples(sampler, 3, StreamDomain::kTest, 0, 0, 100);
  for (const auto& s : samples) {
    EXPECT_NEAR(s.log_p0, -64.0 * std::numbers::ln2, 1e-9);
  }
  center_log_weights(samples);
  for (const auto& s : samples) {
    EXPECT_NEAR(s.log_weight, 0.0, 1e-9);
  }
}

TEST(Sampler, CenteringRemovesTheMean) {
  std::vector<WeightedSample> s(3);
  s[0].log_weight = 1.0;
  s[1].log_weight = 2.0;
  s[2].log_weight = 6.0;
  center_log_weights(s);
  EXPECT_DOUBLE_EQ(s[0].log_weight, -2.0);
  EXPECT_DOUBLE_EQ(s[2].log_weight, 3.0);
}

TEST(Sampler, LogSigmoidIsStable) {
  EXPECT_NEAR(log_sigmoid(0.0), -std::numbers::ln2, 1e-15);
  EXPECT_NEAR(log_sigmoid(-800.0), -800.0, 1e-9);
  EXPECT_NEAR(log_sigmoid(800.0), 0.0, 1e-15);
  EXPECT_NEAR(log_sigmoid(2.0), -std::log1p(std::exp(-2.0)), 1e-15);
}

TEST(Sampler, RejectsMisorderedStages) {
  const auto h = build_hierarchy_2d(4, 4);
  const auto c = CouplingField::uniform(h.lattice(), 0.5);
  const auto bases = sampling_bases(h);
  const CoefficientTable t{bases, 0.1};
  auto base = build_base_distribution(t, h, false);
  std::vector<Stage> wrong{model_stage(h, c), coefficient_stage(h, t, 1)};
  EXPECT_THROW((ChainlessSampler{h, c, base, wrong}), std::invalid_argument);
}

}  // namespace
}  // namespace chainless
