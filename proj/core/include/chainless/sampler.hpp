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

#ifndef CHAINLESS_SAMPLER_HPP
#define CHAINLESS_SAMPLER_HPP

#include <cstdint>
#include <span>
#include <variant>
#include <vector>

#include "chainless/lattice.hpp"
#include "chainless/marginal.hpp"
#include "chainless/model.hpp"
#include "chainless/rng.hpp"

/**
 * \file
 * \brief Chainless sampling: enumerate the base level, then fill in each
 * sampled set given the next level, keeping log-probabilities throughout.
 */

namespace chainless {

/// Exact categorical distribution over the states of the base level.
///
/// State bit k corresponds to sites()[k]; a set bit is spin +1.
class BaseLevelDistribution {
 public:
  static constexpr int kMaxSites = 24;

  /// Normalizes `log_weights` (one per state). With `restrict_nonneg`, states with a negative spin sum get
  /// probability zero.
  BaseLevelDistribution(std::vector<SiteId> sites, std::span<const double> log_weights, bool restrict_nonneg);

  [[nodiscard]] std::span<const SiteId> sites() const noexcept { return sites_; }
  [[nodiscard]] std::size_t num_states() const noexcept { return log_prob_.size(); }
  [[nodiscard]] double log_probability(std::uint32_t state) const noexcept { return log_prob_[state]; }
  [[nodiscard]] bool restricted() const noexcept { return restricted_; }

  [[nodiscard]] std::uint32_t sample(Rng& rng) const;
  [[nodiscard]] std::uint32_t state_of(std::span<const std::int8_t> spins) const noexcept;
  void assign(std::uint32_t state, std::span<std::int8_t> spins) const noexcept;

 private:
  std::vector<SiteId> sites_;
  std::vector<double> log_prob_;
  std::vector<double> cdf_;
  bool restricted_;
};

/// Base distribution proportional to exp(W_n) with the base pair Hamiltonian of `table`.
[[nodiscard]] BaseLevelDistribution build_base_distribution(const CoefficientTable& table,
                                                            const LevelHierarchy& hierarchy, bool restrict_nonneg);

/// Independent spins given their partners: P(s = +1) = 1 / (1 + exp(-2h)), h = sum weight * partner spin.
struct LocalFieldStage {
  int level = 0;
  std::vector<SiteId> sites;
  std::vector<std::uint32_t> row;  ///< sites.size() + 1 offsets into partners/weights
  std::vector<SiteId> partners;
  std::vector<double> weights;
};

/// Joint table of the sampled spins of a level given every spin of the next level.
struct TabulatedStage {
  int level = 0;
  std::vector<SiteId> given;    ///< conditioning sites, bit k of the key
  std::vector<SiteId> sampled;  ///< sampled sites, bit k of the value
  /// log P(value | key) at key * 2^|sampled| + value.
  std::vector<double> log_prob;
};

using Stage = std::variant<LocalFieldStage, TabulatedStage>;

/// Stage for level 0, using the model couplings directly.
[[nodiscard]] LocalFieldStage model_stage(const LevelHierarchy& hierarchy, const CouplingField& couplings);
/// Stage for level i (1 <= i < n) from fitted coefficients.
[[nodiscard]] LocalFieldStage coefficient_stage(const LevelHierarchy& hierarchy, const CoefficientTable& table,
                                                int level);

struct WeightedSample {
  SpinConfiguration spins;
  /// Log-probability of the sample under the sampler.
  double log_p0 = 0.0;
  /// W0(S) - log_p0, before centering.
  double log_weight = 0.0;
};

/// Draws independent full-lattice samples with their log sampling weights.
class ChainlessSampler {
 public:
  /// Sampler from fitted coefficients; level 0 always uses the model couplings.
  ChainlessSampler(const LevelHierarchy& hierarchy, const CouplingField& couplings, const CoefficientTable& table,
                   bool restrict_nonneg);
  /// Sampler from explicit parts; `stages` run in order and must cover levels n-1 down to 0.
  ChainlessSampler(const LevelHierarchy& hierarchy, const CouplingField& couplings, BaseLevelDistribution base,
                   std::vector<Stage> stages);

  [[nodiscard]] WeightedSample draw(Rng& rng) const;
  /// log P0 of a given configuration; -inf if the sampler cannot produce it.
  [[nodiscard]] double log_probability(const SpinConfiguration& spins) const;

  [[nodiscard]] const BaseLevelDistribution& base() const noexcept { return base_; }
  [[nodiscard]] const LevelHierarchy& hierarchy() const noexcept { return *hierarchy_; }
  [[nodiscard]] const CouplingField& couplings() const noexcept { return *couplings_; }

 private:
  const LevelHierarchy* hierarchy_;
  const CouplingField* couplings_;
  BaseLevelDistribution base_;
  std::vector<Stage> stages_;
};

/// Draws samples first..first+count-1; sample i uses stream (seed, domain, i, sub).
[[nodiscard]] std::vector<WeightedSample> draw_samples(const ChainlessSampler& sampler, std::uint64_t seed,
                                                       StreamDomain domain, std::uint64_t sub, std::size_t first,
                                                       std::size_t count, int threads = 1);

/// Subtracts the batch mean of log_weight, so the batch satisfies E[log w] = 0.
void center_log_weights(std::span<WeightedSample> samples);

/// log(1 / (1 + exp(-x))) without overflow.
[[nodiscard]] double log_sigmoid(double x) noexcept;

}  // namespace chainless

#endif  // CHAINLESS_SAMPLER_HPP
