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

#ifndef CHAINLESS_EXACT_MARGINAL_HPP
#define CHAINLESS_EXACT_MARGINAL_HPP

#include <complex>
#include <cstdint>
#include <span>
#include <vector>

#include "chainless/lattice.hpp"
#include "chainless/marginal.hpp"
#include "chainless/reference.hpp"
#include "chainless/sampler.hpp"

/**
 * \file
 * \brief Exact marginals of enumerable lattices, used as oracles.
 */

namespace chainless {

/// Exact log-probabilities of the spins of one level. Bit k of a state is sites[k].
struct LevelMarginal {
  int level = 0;
  std::vector<SiteId> sites;
  std::vector<double> log_prob;
};

[[nodiscard]] LevelMarginal exact_level_marginal(const EnumerationOracle& oracle, const LevelHierarchy& hierarchy,
                                                 int level);

/// Level state of a full configuration.
[[nodiscard]] std::uint32_t level_state(std::span<const SiteId> sites, std::span<const std::int8_t> spins) noexcept;

/// E[dW0/ds_u | spins of level `level` = state], for u a site of that level.
[[nodiscard]] double exact_conditional_derivative(const EnumerationOracle& oracle, const LevelHierarchy& hierarchy,
                                                  int level, SiteId site, std::uint32_t state);

/// d/dz log sum over the spins outside the level of exp(W0 with s_u = z), at z = s_u, by complex step.
/// `site` must belong to the level.
[[nodiscard]] double marginal_derivative_complex_step(const EnumerationOracle& oracle,
                                                      const LevelHierarchy& hierarchy, int level, SiteId site,
                                                      std::uint32_t state, double step = 1e-20);

/// Sampler whose base and stages 1..n-1 are exact, giving constant weights.
[[nodiscard]] ChainlessSampler exact_sampler(const EnumerationOracle& oracle, const LevelHierarchy& hierarchy,
                                             bool restrict_nonneg = false);

/// Projection coefficients with every expectation taken exactly over the Boltzmann distribution.
[[nodiscard]] CoefficientTable exact_projection_table(const EnumerationOracle& oracle, const LevelHierarchy& hierarchy,
                                                      std::span<const BasisSet> bases, const SolvePolicy& policy = {});

}  // namespace chainless

#endif  // CHAINLESS_EXACT_MARGINAL_HPP
