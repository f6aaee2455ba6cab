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

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <utility>

namespace chainless {

EnumerationOracle::EnumerationOracle(const CouplingField& couplings) : couplings_{couplings} {
  const SiteId n = couplings.lattice().size();
  if (n > kMaxSpins) {
    throw std::invalid_argument("enumeration is limited to " + std::to_string(kMaxSpins) + " spins, lattice has " +
                                std::to_string(n));
  }
  const std::size_t states = std::size_t{1} << n;
  log_prob_.resize(states);
  // Gray-code walk: each step flips one spin and changes W0 by -2 s h.
  SpinConfiguration spins{n, -1};
  double w = log_density_unnormalized(spins, couplings);
  log_prob_[0] = w;
  for (std::size_t i = 1; i < states; ++i) {
    const auto site = static_cast<SiteId>(std::countr_zero(i));
    const double h = local_field(spins.values(), couplings, site);
    w -= 2.0 * spins[site] * h;
    spins[site] = static_cast<std::int8_t>(-spins[site]);
    log_prob_[i ^ (i >> 1U)] = w;
  }
  const double top = *std::max_element(log_prob_.begin(), log_prob_.end());
  double total = 0.0;
  for (double l : log_prob_) {
    total += std::exp(l - top);
  }
  log_z_ = top + std::log(total);
  for (double& l : log_prob_) {
    l -= log_z_;
  }
}

SpinConfiguration EnumerationOracle::configuration(std::uint32_t state) const {
  SpinConfiguration out{couplings_.lattice().size(), -1};
  for (SiteId k = 0; k < out.size(); ++k) {
    if (((state >> static_cast<unsigned>(k)) & 1U) != 0U) {
      out[k] = 1;
    }
  }
  return out;
}

std::uint32_t EnumerationOracle::state_of(std::span<const std::int8_t> spins) noexcept {
  std::uint32_t state = 0;
  for (std::size_t k = 0; k < spins.size(); ++k) {
    if (spins[k] > 0) {
      state |= 1U << k;
    }
  }
  return state;
}

void EnumerationOracle::for_each(
    const std::function<void(std::uint32_t, std::span<const std::int8_t>, double)>& f) const {
  const SiteId n = couplings_.lattice().size();
  SpinConfiguration spins{n, -1};
  f(0, spins.values(), std::exp(log_prob_[0]));
  for (std::size_t i = 1; i < log_prob_.size(); ++i) {
    const auto site = static_cast<SiteId>(std::countr_zero(i));
    spins[site] = static_cast<std::int8_t>(-spins[site]);
    const auto g = static_cast<std::uint32_t>(i ^ (i >> 1U));
    f(g, spins.values(), std::exp(log_prob_[g]));
  }
}

double exact_expectation(const EnumerationOracle& oracle,
                         const std::function<double(std::span<const std::int8_t>)>& h) {
  double sum = 0.0;
  oracle.for_each([&](std::uint32_t, std::span<const std::int8_t> s, double p) { sum += p * h(s); });
  return sum;
}

// ---------------------------------------------------------------------------

std::size_t metropolis_sweep(SpinConfiguration& spins, const CouplingField& couplings, Rng& rng) {
  // Random scan: a fixed site order flips every zero-cost spin each sweep and is not ergodic.
  std::size_t accepted = 0;
  auto view = spins.values();
  std::uniform_int_distribution<SiteId> pick{0, spins.size() - 1};
  for (SiteId k = 0; k < spins.size(); ++k) {
    const SiteId s = pick(rng);
    const double delta = -2.0 * view[static_cast<std::size_t>(s)] * local_field(view, couplings, s);
    if (delta >= 0.0 || uniform01(rng) < std::exp(delta)) {
      view[static_cast<std::size_t>(s)] = static_cast<std::int8_t>(-view[static_cast<std::size_t>(s)]);
      ++accepted;
    }
  }
  return accepted;
}

namespace {

SpinConfiguration random_configuration(SiteId n, Rng& rng) {
  SpinConfiguration out{n};
  for (SiteId k = 0; k < n; ++k) {
    out[k] = uniform01(rng) < 0.5 ? 1 : -1;
  }
  return out;
}

double unit_energy(const SpinConfiguration& spins, const CouplingField& couplings) {
  const Lattice& lat = couplings.lattice();
  double sum = 0.0;
  for (SiteId s = 0; s < lat.size(); ++s) {
    for (int axis = 0; axis < lat.dim(); ++axis) {
      sum += couplings.unit_bond(s, axis) * spins[s] * spins[lat.forward(s, axis)];
    }
  }
  return sum;
}

}  // namespace

MetropolisChain::MetropolisChain(const CouplingField& couplings, std::uint64_t seed, std::uint64_t stream)
    : couplings_{&couplings}, rng_{make_stream(seed, StreamDomain::kMetropolis, stream)} {
  spins_ = random_configuration(couplings.lattice().size(), rng_);
}

MetropolisChain::MetropolisChain(const CouplingField& couplings, SpinConfiguration start, Rng rng)
    : couplings_{&couplings}, spins_{std::move(start)}, rng_{std::move(rng)} {
  if (spins_.size() != couplings.lattice().size()) {
    throw SizeMismatch("start configuration does not match the lattice");
  }
}

void MetropolisChain::sweep() {
  accepted_ += static_cast<std::int64_t>(metropolis_sweep(spins_, *couplings_, rng_));
  proposed_ += spins_.size();
}

void MetropolisChain::set_couplings(const CouplingField& couplings) {
  if (!(couplings.lattice() == couplings_->lattice())) {
    throw SizeMismatch("couplings live on a different lattice");
  }
  couplings_ = &couplings;
}

double MetropolisChain::acceptance_rate() const noexcept {
  return proposed_ > 0 ? static_cast<double>(accepted_) / static_cast<double>(proposed_) : 0.0;
}

double MetropolisChain::unit_log_density() const { return unit_energy(spins_, *couplings_); }

void metropolis_chain(const CouplingField& couplings, std::size_t sweeps, std::size_t burn_in, std::uint64_t seed,
                      const std::function<void(std::size_t, const SpinConfiguration&)>& observe) {
  MetropolisChain chain{couplings, seed};
  for (std::size_t k = 0; k < burn_in; ++k) {
    chain.sweep();
  }
  for (std::size_t k = 0; k < sweeps; ++k) {
    chain.sweep();
    observe(k, chain.state());
  }
}

// ---------------------------------------------------------------------------

std::vector<double> geometric_ladder(double t_min, double t_max, std::size_t count) {
  if (!(t_min > 0.0) || !(t_max > t_min) || count < 2) {
    throw std::invalid_argument("geometric ladder needs 0 < t_min < t_max and at least two temperatures");
  }
  std::vector<double> out(count);
  const double ratio = std::pow(t_max / t_min, 1.0 / static_cast<double>(count - 1));
  for (std::size_t k = 0; k < count; ++k) {
    out[k] = t_min * std::pow(ratio, static_cast<double>(k));
  }
  out.back() = t_max;
  return out;
}

std::vector<double> merge_ladder(std::span<const double> a, std::span<const double> b) {
  std::vector<double> all(a.begin(), a.end());
  all.insert(all.end(), b.begin(), b.end());
  std::sort(all.begin(), all.end());
  std::vector<double> out;
  for (double t : all) {
    if (out.empty() || t - out.back() > 1e-9) {
      out.push_back(t);
    }
  }
  return out;
}

TemperingResult parallel_tempering(const CouplingField& couplings, const TemperingConfig& config) {
  const auto& temps = config.temperatures;
  if (temps.size() < 2 || !std::is_sorted(temps.begin(), temps.end())) {
    throw std::invalid_argument("tempering needs at least two ascending temperatures");
  }
  const std::size_t k_max = temps.size();
  std::vector<CouplingField> fields;
  fields.reserve(k_max);
  for (double t : temps) {
    fields.push_back(couplings.with_beta(1.0 / t));
  }
  const SiteId n = couplings.lattice().size();

  struct Ladder {
    std::vector<SpinConfiguration> states;  // states[k] sits at temperature k
    std::vector<double> energy;
    Rng rng;
  };
  std::vector<Ladder> ladders;
  for (std::uint64_t l = 0; l < 2; ++l) {
    Ladder lad{{}, {}, make_stream(config.seed, StreamDomain::kTempering, l)};
    for (std::size_t k = 0; k < k_max; ++k) {
      lad.states.push_back(random_configuration(n, lad.rng));
    }
    lad.energy.assign(k_max, 0.0);
    ladders.push_back(std::move(lad));
  }
  std::vector<double> swaps_tried(k_max - 1, 0.0);
  std::vector<double> swaps_done(k_max - 1, 0.0);
  std::vector<ObservableAccumulator> q2(k_max);
  std::vector<ObservableAccumulator> q4(k_max);

  for (std::size_t sweep = 0; sweep < config.burn_in + config.sweeps; ++sweep) {
    for (auto& lad : ladders) {
      for (std::size_t k = 0; k < k_max; ++k) {
        metropolis_sweep(lad.states[k], fields[k], lad.rng);
        lad.energy[k] = unit_energy(lad.states[k], couplings);
      }
      // Alternate even and odd pairs so every adjacent pair is tried every other sweep.
      for (std::size_t k = sweep % 2; k + 1 < k_max; k += 2) {
        const double bi = 1.0 / temps[k];
        const double bj = 1.0 / temps[k + 1];
        const double log_acc = (bi - bj) * (lad.energy[k + 1] - lad.energy[k]);
        swaps_tried[k] += 1.0;
        if (log_acc >= 0.0 || uniform01(lad.rng) < std::exp(log_acc)) {
          std::swap(lad.states[k], lad.states[k + 1]);
          std::swap(lad.energy[k], lad.energy[k + 1]);
          swaps_done[k] += 1.0;
        }
      }
    }
    if (sweep >= config.burn_in) {
      for (std::size_t k = 0; k < k_max; ++k) {
        const double q = overlap(ladders[0].states[k], ladders[1].states[k]);
        q2[k].add(1.0, q * q);
        q4[k].add(1.0, q * q * q * q);
      }
    }
  }
  TemperingResult out;
  out.temperatures = temps;
  for (std::size_t k = 0; k + 1 < k_max; ++k) {
    out.swap_acceptance.push_back(swaps_tried[k] > 0.0 ? swaps_done[k] / swaps_tried[k] : 0.0);
  }
  for (std::size_t k = 0; k < k_max; ++k) {
    out.moments.push_back({q2[k].mean(), q4[k].mean(), config.sweeps, static_cast<double>(config.sweeps)});
  }
  return out;
}

}  // namespace chainless
