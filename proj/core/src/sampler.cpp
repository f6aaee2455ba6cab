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

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <utility>

#include "chainless/parallel.hpp"

namespace chainless {

double log_sigmoid(double x) noexcept { return x >= 0.0 ? -std::log1p(std::exp(-x)) : x - std::log1p(std::exp(x)); }

// ---------------------------------------------------------------------------
// Base level

BaseLevelDistribution::BaseLevelDistribution(std::vector<SiteId> sites, std::span<const double> log_weights,
                                             bool restrict_nonneg)
    : sites_{std::move(sites)}, restricted_{restrict_nonneg} {
  const auto k = static_cast<int>(sites_.size());
  if (k > kMaxSites) {
    throw std::invalid_argument("base level has " + std::to_string(k) + " sites; at most " +
                                std::to_string(kMaxSites) + " can be enumerated");
  }
  const std::size_t states = std::size_t{1} << k;
  if (log_weights.size() != states) {
    throw std::invalid_argument("base distribution needs one log-weight per state");
  }
  log_prob_.assign(log_weights.begin(), log_weights.end());
  constexpr double kNegInf = -std::numeric_limits<double>::infinity();
  if (restrict_nonneg) {
    for (std::size_t s = 0; s < states; ++s) {
      const int sum = 2 * std::popcount(static_cast<std::uint32_t>(s)) - k;
      if (sum < 0) {
        log_prob_[s] = kNegInf;
      }
    }
  }
  const double top = *std::max_element(log_prob_.begin(), log_prob_.end());
  if (!std::isfinite(top)) {
    throw std::invalid_argument("base distribution has no finite state weight");
  }
  double total = 0.0;
  for (double lw : log_prob_) {
    total += std::exp(lw - top);
  }
  const double log_z = top + std::log(total);
  cdf_.resize(states);
  double acc = 0.0;
  for (std::size_t s = 0; s < states; ++s) {
    log_prob_[s] -= log_z;
    acc += std::exp(log_prob_[s]);
    cdf_[s] = acc;
  }
}

std::uint32_t BaseLevelDistribution::sample(Rng& rng) const {
  const double x = uniform01(rng) * cdf_.back();
  auto it = std::upper_bound(cdf_.begin(), cdf_.end(), x);
  if (it == cdf_.end()) {
    it = std::prev(it);
    while (it != cdf_.begin() && !std::isfinite(log_prob_[static_cast<std::size_t>(it - cdf_.begin())])) {
      --it;
    }
  }
  return static_cast<std::uint32_t>(it - cdf_.begin());
}

std::uint32_t BaseLevelDistribution::state_of(std::span<const std::int8_t> spins) const noexcept {
  std::uint32_t state = 0;
  for (std::size_t k = 0; k < sites_.size(); ++k) {
    if (spins[static_cast<std::size_t>(sites_[k])] > 0) {
      state |= 1U << k;
    }
  }
  return state;
}

void BaseLevelDistribution::assign(std::uint32_t state, std::span<std::int8_t> spins) const noexcept {
  for (std::size_t k = 0; k < sites_.size(); ++k) {
    spins[static_cast<std::size_t>(sites_[k])] = ((state >> k) & 1U) != 0U ? 1 : -1;
  }
}

BaseLevelDistribution build_base_distribution(const CoefficientTable& table, const LevelHierarchy& hierarchy,
                                              bool restrict_nonneg) {
  const Level& base = hierarchy.base();
  const auto k = static_cast<int>(base.sites.size());
  if (k > BaseLevelDistribution::kMaxSites) {
    throw std::invalid_argument("base level too large to enumerate");
  }
  const auto& block = table.level(base.index);
  if (block.sites != base.stencil_sites) {
    throw std::invalid_argument("coefficient table does not match the base level");
  }
  struct Bond {
    unsigned u;
    unsigned w;
    double coupling;
  };
  std::vector<Bond> bonds;
  auto bit_of = [&](SiteId s) {
    return static_cast<unsigned>(std::lower_bound(base.sites.begin(), base.sites.end(), s) - base.sites.begin());
  };
  // W_n = 1/2 sum_u sum_p g_up s_u s_w with g = 2 * multiplicity * a; each ordered entry adds half a bond.
  for (std::size_t u = 0; u < base.stencils.size(); ++u) {
    if (block.offsets[u + 1] - block.offsets[u] != base.stencils[u].size()) {
      throw std::invalid_argument("coefficient table does not match the base stencil");
    }
    for (std::size_t p = 0; p < base.stencils[u].size(); ++p) {
      const auto& partner = base.stencils[u][p];
      const double g = 2.0 * partner.multiplicity * block.values[block.offsets[u] + p];
      bonds.push_back({bit_of(base.stencil_sites[u]), bit_of(partner.site), 0.5 * g});
    }
  }
  std::vector<double> log_weights(std::size_t{1} << k);
  for (std::size_t s = 0; s < log_weights.size(); ++s) {
    double w = 0.0;
    for (const auto& b : bonds) {
      const unsigned differ = ((static_cast<unsigned>(s) >> b.u) ^ (static_cast<unsigned>(s) >> b.w)) & 1U;
      w += differ != 0U ? -b.coupling : b.coupling;
    }
    log_weights[s] = w;
  }
  return BaseLevelDistribution{base.sites, log_weights, restrict_nonneg};
}

// ---------------------------------------------------------------------------
// Stages

LocalFieldStage model_stage(const LevelHierarchy& hierarchy, const CouplingField& couplings) {
  if (!(couplings.lattice() == hierarchy.lattice())) {
    throw SizeMismatch("couplings and hierarchy live on different lattices");
  }
  if (couplings.field() != 0.0) {
    throw std::invalid_argument("the chainless sampler does not support an external field");
  }
  const Level& level = hierarchy.level(0);
  LocalFieldStage st;
  st.level = 0;
  st.sites = level.sampled;
  st.row.push_back(0);
  for (SiteId s : st.sites) {
    const auto nbrs = hierarchy.lattice().neighbors(s);
    const auto j = couplings.incident(s);
    for (std::size_t k = 0; k < nbrs.size(); ++k) {
      st.partners.push_back(nbrs[k]);
      st.weights.push_back(j[k]);
    }
    st.row.push_back(static_cast<std::uint32_t>(st.partners.size()));
  }
  return st;
}

LocalFieldStage coefficient_stage(const LevelHierarchy& hierarchy, const CoefficientTable& table, int level) {
  if (level <= 0 || level >= hierarchy.base_level()) {
    throw std::invalid_argument("coefficient stages exist for levels 1..n-1");
  }
  const Level& lv = hierarchy.level(level);
  const auto& block = table.level(level);
  if (block.sites != lv.stencil_sites) {
    throw std::invalid_argument("coefficient table does not match level " + std::to_string(level));
  }
  LocalFieldStage st;
  st.level = level;
  st.sites = lv.sampled;
  st.row.push_back(0);
  for (std::size_t u = 0; u < lv.stencils.size(); ++u) {
    if (block.offsets[u + 1] - block.offsets[u] != lv.stencils[u].size()) {
      throw std::invalid_argument("coefficient table does not match the stencil of level " + std::to_string(level));
    }
    for (std::size_t p = 0; p < lv.stencils[u].size(); ++p) {
      st.partners.push_back(lv.stencils[u][p].site);
      st.weights.push_back(2.0 * lv.stencils[u][p].multiplicity * block.values[block.offsets[u] + p]);
    }
    st.row.push_back(static_cast<std::uint32_t>(st.partners.size()));
  }
  return st;
}

namespace {

int stage_level(const Stage& st) {
  return std::visit([](const auto& s) { return s.level; }, st);
}

double field_of(const LocalFieldStage& st, std::size_t k, std::span<const std::int8_t> spins) noexcept {
  double h = 0.0;
  for (std::uint32_t e = st.row[k]; e < st.row[k + 1]; ++e) {
    h += st.weights[e] * spins[static_cast<std::size_t>(st.partners[e])];
  }
  return h;
}

double run_stage(const LocalFieldStage& st, std::span<std::int8_t> spins, Rng* rng) {
  double lp = 0.0;
  for (std::size_t k = 0; k < st.sites.size(); ++k) {
    const double x = 2.0 * field_of(st, k, spins);
    if (!std::isfinite(x)) {
      throw std::runtime_error("non-finite local field at level " + std::to_string(st.level));
    }
    auto& s = spins[static_cast<std::size_t>(st.sites[k])];
    if (rng != nullptr) {
      const double p_up = 1.0 / (1.0 + std::exp(-x));
      s = uniform01(*rng) < p_up ? 1 : -1;
    }
    lp += log_sigmoid(s * x);
  }
  return lp;
}

double run_stage(const TabulatedStage& st, std::span<std::int8_t> spins, Rng* rng) {
  std::size_t key = 0;
  for (std::size_t k = 0; k < st.given.size(); ++k) {
    if (spins[static_cast<std::size_t>(st.given[k])] > 0) {
      key |= std::size_t{1} << k;
    }
  }
  const std::size_t width = std::size_t{1} << st.sampled.size();
  const double* row = st.log_prob.data() + key * width;
  std::size_t value = 0;
  if (rng != nullptr) {
    const double x = uniform01(*rng);
    double acc = 0.0;
    value = width - 1;
    for (std::size_t v = 0; v < width; ++v) {
      acc += std::exp(row[v]);
      if (x < acc) {
        value = v;
        break;
      }
    }
    for (std::size_t k = 0; k < st.sampled.size(); ++k) {
      spins[static_cast<std::size_t>(st.sampled[k])] = ((value >> k) & 1U) != 0U ? 1 : -1;
    }
  } else {
    for (std::size_t k = 0; k < st.sampled.size(); ++k) {
      if (spins[static_cast<std::size_t>(st.sampled[k])] > 0) {
        value |= std::size_t{1} << k;
      }
    }
  }
  return row[value];
}

std::vector<Stage> stages_from_table(const LevelHierarchy& hierarchy, const CouplingField& couplings,
                                     const CoefficientTable& table) {
  std::vector<Stage> out;
  for (int i = hierarchy.base_level() - 1; i >= 1; --i) {
    out.emplace_back(coefficient_stage(hierarchy, table, i));
  }
  if (hierarchy.base_level() > 0) {
    out.emplace_back(model_stage(hierarchy, couplings));
  }
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// Sampler

ChainlessSampler::ChainlessSampler(const LevelHierarchy& hierarchy, const CouplingField& couplings,
                                   const CoefficientTable& table, bool restrict_nonneg)
    : ChainlessSampler(hierarchy, couplings, build_base_distribution(table, hierarchy, restrict_nonneg),
                       stages_from_table(hierarchy, couplings, table)) {}

ChainlessSampler::ChainlessSampler(const LevelHierarchy& hierarchy, const CouplingField& couplings,
                                   BaseLevelDistribution base, std::vector<Stage> stages)
    : hierarchy_{&hierarchy}, couplings_{&couplings}, base_{std::move(base)}, stages_{std::move(stages)} {
  if (!(couplings.lattice() == hierarchy.lattice())) {
    throw SizeMismatch("couplings and hierarchy live on different lattices");
  }
  if (static_cast<int>(stages_.size()) != hierarchy.base_level()) {
    throw std::invalid_argument("sampler needs one stage per level below the base");
  }
  for (std::size_t k = 0; k < stages_.size(); ++k) {
    if (stage_level(stages_[k]) != hierarchy.base_level() - 1 - static_cast<int>(k)) {
      throw std::invalid_argument("sampler stages must run from level n-1 down to 0");
    }
  }
}

WeightedSample ChainlessSampler::draw(Rng& rng) const {
  WeightedSample out;
  out.spins = SpinConfiguration{hierarchy_->lattice().size()};
  auto spins = out.spins.values();
  const std::uint32_t state = base_.sample(rng);
  base_.assign(state, spins);
  double lp = base_.log_probability(state);
  for (const auto& st : stages_) {
    lp += std::visit([&](const auto& s) { return run_stage(s, spins, &rng); }, st);
  }
  out.log_p0 = lp;
  out.log_weight = log_density_unnormalized(out.spins, *couplings_) - lp;
  return out;
}

double ChainlessSampler::log_probability(const SpinConfiguration& spins) const {
  if (spins.size() != hierarchy_->lattice().size()) {
    throw SizeMismatch("configuration does not match the sampler lattice");
  }
  SpinConfiguration copy = spins;
  auto view = copy.values();
  double lp = base_.log_probability(base_.state_of(view));
  for (const auto& st : stages_) {
    lp += std::visit([&](const auto& s) { return run_stage(s, view, nullptr); }, st);
  }
  return lp;
}

std::vector<WeightedSample> draw_samples(const ChainlessSampler& sampler, std::uint64_t seed, StreamDomain domain,
                                         std::uint64_t sub, std::size_t first, std::size_t count, int threads) {
  std::vector<WeightedSample> out(count);
  parallel_for(count, threads, [&](std::size_t i) {
    Rng rng = make_stream(seed, domain, first + i, sub);
    out[i] = sampler.draw(rng);
  });
  return out;
}

void center_log_weights(std::span<WeightedSample> samples) {
  if (samples.empty()) {
    return;
  }
  double mean = 0.0;
  for (const auto& s : samples) {
    mean += s.log_weight;
  }
  mean /= static_cast<double>(samples.size());
  for (auto& s : samples) {
    s.log_weight -= mean;
  }
}

}  // namespace chainless
