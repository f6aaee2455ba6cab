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

#include "chainless/exact_marginal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace chainless {

std::uint32_t level_state(std::span<const SiteId> sites, std::span<const std::int8_t> spins) noexcept {
  std::uint32_t state = 0;
  for (std::size_t k = 0; k < sites.size(); ++k) {
    if (spins[static_cast<std::size_t>(sites[k])] > 0) {
      state |= 1U << k;
    }
  }
  return state;
}

LevelMarginal exact_level_marginal(const EnumerationOracle& oracle, const LevelHierarchy& hierarchy, int level) {
  if (!(oracle.couplings().lattice() == hierarchy.lattice())) {
    throw SizeMismatch("oracle and hierarchy live on different lattices");
  }
  LevelMarginal out;
  out.level = level;
  out.sites = hierarchy.level(level).sites;
  std::vector<double> prob(std::size_t{1} << out.sites.size(), 0.0);
  oracle.for_each([&](std::uint32_t, std::span<const std::int8_t> s, double p) { prob[level_state(out.sites, s)] += p; });
  out.log_prob.resize(prob.size());
  std::transform(prob.begin(), prob.end(), out.log_prob.begin(), [](double p) { return std::log(p); });
  return out;
}

double exact_conditional_derivative(const EnumerationOracle& oracle, const LevelHierarchy& hierarchy, int level,
                                    SiteId site, std::uint32_t state) {
  const auto& sites = hierarchy.level(level).sites;
  double num = 0.0;
  double den = 0.0;
  oracle.for_each([&](std::uint32_t, std::span<const std::int8_t> s, double p) {
    if (level_state(sites, s) == state) {
      num += p * local_field(s, oracle.couplings(), site);
      den += p;
    }
  });
  if (!(den > 0.0)) {
    throw std::domain_error("conditioning level state has zero probability");
  }
  return num / den;
}

namespace {

int state_spin(std::span<const SiteId> sites, SiteId site, std::uint32_t state) {
  const auto k = static_cast<unsigned>(std::find(sites.begin(), sites.end(), site) - sites.begin());
  return ((state >> k) & 1U) != 0U ? 1 : -1;
}

}  // namespace

double marginal_derivative_complex_step(const EnumerationOracle& oracle, const LevelHierarchy& hierarchy, int level,
                                        SiteId site, std::uint32_t state, double step) {
  const auto& sites = hierarchy.level(level).sites;
  if (!hierarchy.contains(level, site)) {
    throw std::invalid_argument("site is not part of the level");
  }
  // W0 is affine in s_u: W0 = s_u h_u + R. Each matching state contributes exp(R + z h_u), with R recovered
  // from its (normalized) log-probability; the normalization only shifts the log by a constant.
  using C = std::complex<double>;
  const C z{0.0, step};
  C sum{0.0, 0.0};
  double top = -std::numeric_limits<double>::infinity();
  std::vector<std::pair<double, double>> terms;
  oracle.for_each([&](std::uint32_t full, std::span<const std::int8_t> s, double) {
    if (level_state(sites, s) != state) {
      return;
    }
    const double h = local_field(s, oracle.couplings(), site);
    const double rest = oracle.log_probability(full) - s[static_cast<std::size_t>(site)] * h;
    terms.emplace_back(rest, h);
  });
  if (terms.empty()) {
    throw std::domain_error("conditioning level state matches no configuration");
  }
  // All matching states share s_u, so the step is taken about that value.
  const double su = static_cast<double>(state_spin(sites, site, state));
  for (const auto& [rest, h] : terms) {
    top = std::max(top, rest + su * h);
  }
  for (const auto& [rest, h] : terms) {
    sum += std::exp(C{rest - top, 0.0} + (su + z) * h);
  }
  return std::log(sum).imag() / step;
}

ChainlessSampler exact_sampler(const EnumerationOracle& oracle, const LevelHierarchy& hierarchy, bool restrict_nonneg) {
  const int n = hierarchy.base_level();
  std::vector<LevelMarginal> marginals;
  for (int i = 0; i <= n; ++i) {
    marginals.push_back(i == 0 ? LevelMarginal{} : exact_level_marginal(oracle, hierarchy, i));
  }
  BaseLevelDistribution base{hierarchy.base().sites, marginals[static_cast<std::size_t>(n)].log_prob, restrict_nonneg};
  std::vector<Stage> stages;
  for (int i = n - 1; i >= 1; --i) {
    const Level& lv = hierarchy.level(i);
    TabulatedStage st;
    st.level = i;
    st.given = hierarchy.level(i + 1).sites;
    st.sampled = lv.sampled;
    // Where each level-i site (bit order of the marginal) comes from.
    std::vector<std::pair<bool, unsigned>> source;
    for (SiteId s : lv.sites) {
      auto g = std::find(st.given.begin(), st.given.end(), s);
      if (g != st.given.end()) {
        source.emplace_back(true, static_cast<unsigned>(g - st.given.begin()));
      } else {
        auto d = std::find(st.sampled.begin(), st.sampled.end(), s);
        source.emplace_back(false, static_cast<unsigned>(d - st.sampled.begin()));
      }
    }
    const auto& fine = marginals[static_cast<std::size_t>(i)].log_prob;
    const auto& coarse = marginals[static_cast<std::size_t>(i + 1)].log_prob;
    const std::size_t keys = std::size_t{1} << st.given.size();
    const std::size_t width = std::size_t{1} << st.sampled.size();
    st.log_prob.resize(keys * width);
    for (std::size_t key = 0; key < keys; ++key) {
      for (std::size_t value = 0; value < width; ++value) {
        std::uint32_t full = 0;
        for (std::size_t b = 0; b < source.size(); ++b) {
          const auto [given, bit] = source[b];
          const std::size_t word = given ? key : value;
          if (((word >> bit) & 1U) != 0U) {
            full |= 1U << b;
          }
        }
        st.log_prob[key * width + value] = fine[full] - coarse[key];
      }
    }
    stages.emplace_back(std::move(st));
  }
  if (n > 0) {
    stages.emplace_back(model_stage(hierarchy, oracle.couplings()));
  }
  return ChainlessSampler{hierarchy, oracle.couplings(), std::move(base), std::move(stages)};
}

CoefficientTable exact_projection_table(const EnumerationOracle& oracle, const LevelHierarchy& hierarchy,
                                        std::span<const BasisSet> bases, const SolvePolicy& policy) {
  std::vector<SpinConfiguration> states;
  std::vector<double> weights;
  states.reserve(oracle.num_states());
  weights.reserve(oracle.num_states());
  oracle.for_each([&](std::uint32_t full, std::span<const std::int8_t>, double p) {
    states.push_back(oracle.configuration(full));
    weights.push_back(p);
  });
  const auto systems = accumulate_projection(states, bases, oracle.couplings(), weights);
  CoefficientTable table = symmetrize(solve_coefficients(systems, bases, policy), hierarchy);
  table.sample_count = static_cast<std::int64_t>(oracle.num_states());
  return table;
}

}  // namespace chainless
