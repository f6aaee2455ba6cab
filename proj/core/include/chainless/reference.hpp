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

#ifndef CHAINLESS_REFERENCE_HPP
#define CHAINLESS_REFERENCE_HPP

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "chainless/estimator.hpp"
#include "chainless/model.hpp"
#include "chainless/rng.hpp"

namespace chainless {

/// Exact Boltzmann distribution by listing every state. State bit k is site k; a set bit is +1.
class EnumerationOracle {
 public:
  static constexpr int kMaxSpins = 24;

  explicit EnumerationOracle(const CouplingField& couplings);

  [[nodiscard]] const CouplingField& couplings() const noexcept { return couplings_; }
  [[nodiscard]] std::size_t num_states() const noexcept { return log_prob_.size(); }
  [[nodiscard]] double log_partition() const noexcept { return log_z_; }
  [[nodiscard]] double log_probability(std::uint32_t state) const noexcept { return log_prob_[state]; }
  [[nodiscard]] SpinConfiguration configuration(std::uint32_t state) const;
  [[nodiscard]] static std::uint32_t state_of(std::span<const std::int8_t> spins) noexcept;

  /// Calls f(state, spins, probability) for every state.
  void for_each(const std::function<void(std::uint32_t, std::span<const std::int8_t>, double)>& f) const;

 private:
  CouplingField couplings_;
  std::vector<double> log_prob_;
  double log_z_ = 0.0;
};

/// Sum over states of P(state) h(state).
[[nodiscard]] double exact_expectation(const EnumerationOracle& oracle,
                                       const std::function<double(std::span<const std::int8_t>)>& h);

/// One random-scan Metropolis sweep (N proposals at uniformly drawn sites); returns the accepted flips.
std::size_t metropolis_sweep(SpinConfiguration& spins, const CouplingField& couplings, Rng& rng);

/// Single-site Metropolis with sequential sweeps. A nonzero couplings.field() adds the field term.
class MetropolisChain {
 public:
  MetropolisChain(const CouplingField& couplings, std::uint64_t seed, std::uint64_t stream = 0);
  MetropolisChain(const CouplingField& couplings, SpinConfiguration start, Rng rng);

  void sweep();
  [[nodiscard]] const SpinConfiguration& state() const noexcept { return spins_; }
  [[nodiscard]] const CouplingField& couplings() const noexcept { return *couplings_; }
  void set_couplings(const CouplingField& couplings);
  [[nodiscard]] double acceptance_rate() const noexcept;
  /// Sum over bonds of J * s * s' (+ field term) divided by beta, i.e. the unit-coupling log density.
  [[nodiscard]] double unit_log_density() const;

 private:
  const CouplingField* couplings_;
  SpinConfiguration spins_;
  Rng rng_;
  std::int64_t proposed_ = 0;
  std::int64_t accepted_ = 0;
};

/// Runs `burn_in + sweeps` sweeps and calls observe(sweep, state) after each post-burn-in sweep.
void metropolis_chain(const CouplingField& couplings, std::size_t sweeps, std::size_t burn_in, std::uint64_t seed,
                      const std::function<void(std::size_t, const SpinConfiguration&)>& observe);

/// `count` temperatures geometrically spaced over [t_min, t_max], ascending.
[[nodiscard]] std::vector<double> geometric_ladder(double t_min, double t_max, std::size_t count);
/// Sorted union of two temperature sets; values closer than 1e-9 merge.
[[nodiscard]] std::vector<double> merge_ladder(std::span<const double> a, std::span<const double> b);

struct TemperingConfig {
  std::vector<double> temperatures;  ///< ascending
  std::size_t sweeps = 20000;
  std::size_t burn_in = 5000;
  std::uint64_t seed = 0;
  /// Swap attempts between adjacent temperatures after every sweep.
  bool swap_every_sweep = true;
};

struct TemperingResult {
  std::vector<double> temperatures;
  /// Acceptance of swaps between temperature k and k+1, averaged over both ladders.
  std::vector<double> swap_acceptance;
  /// Overlap moments between the two independent ladders at each temperature.
  std::vector<ThermalMoments> moments;
};

/// Two independent replica-exchange ladders on the same disorder; q is measured between them.
[[nodiscard]] TemperingResult parallel_tempering(const CouplingField& couplings, const TemperingConfig& config);

}  // namespace chainless

#endif  // CHAINLESS_REFERENCE_HPP
