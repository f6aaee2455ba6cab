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

#include "chainless/bootstrap.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <utility>

#include "chainless/sampler.hpp"

namespace chainless {

void validate(const BootstrapConfig& config, std::span<const BasisSet> bases) {
  if (config.iterations < 1) {
    throw std::invalid_argument("bootstrap needs at least one iteration");
  }
  std::size_t widest = 0;
  for (const auto& b : bases) {
    widest = std::max(widest, b.max_terms());
  }
  if (config.samples < 1 || static_cast<std::size_t>(config.samples) < widest) {
    throw std::invalid_argument("bootstrap needs at least as many samples per iteration as basis terms (" +
                                std::to_string(widest) + ")");
  }
  if (!std::isfinite(config.initial)) {
    throw std::invalid_argument("initial coefficient must be finite");
  }
}

BootstrapResult run_bootstrap(const BootstrapConfig& config, const LevelHierarchy& hierarchy,
                              std::span<const BasisSet> bases, const CouplingField& couplings) {
  return run_bootstrap(config, hierarchy, bases, couplings, CoefficientTable{bases, config.initial});
}

BootstrapResult run_bootstrap(const BootstrapConfig& config, const LevelHierarchy& hierarchy,
                              std::span<const BasisSet> bases, const CouplingField& couplings,
                              CoefficientTable start) {
  validate(config, bases);
  if (!start.same_shape(CoefficientTable{bases, 0.0})) {
    throw std::invalid_argument("starting table does not match the bases");
  }
  BootstrapResult result;
  result.table = std::move(start);
  std::string description;
  for (const auto& b : bases) {
    description += b.describe(hierarchy.lattice().dim());
  }
  double previous_delta = std::numeric_limits<double>::infinity();

  for (int r = 1; r <= config.iterations; ++r) {
    const auto t0 = std::chrono::steady_clock::now();
    const ChainlessSampler sampler{hierarchy, couplings, result.table, config.restrict_nonneg};
    auto drawn = draw_samples(sampler, config.seed, StreamDomain::kBootstrap, static_cast<std::uint64_t>(r), 0,
                              static_cast<std::size_t>(config.samples), config.threads);
    std::vector<SpinConfiguration> spins;
    spins.reserve(drawn.size());
    for (auto& s : drawn) {
      spins.push_back(std::move(s.spins));
    }
    const auto systems = accumulate_projection(spins, bases, couplings, {}, config.threads);
    SolveReport solve;
    SymmetrizeReport sym;
    const CoefficientTable fresh =
        symmetrize(solve_coefficients(systems, bases, config.policy, &solve), hierarchy, &sym);

    CoefficientTable next = fresh;
    double sq = 0.0;
    std::size_t count = 0;
    for (std::size_t k = 0; k < next.num_blocks(); ++k) {
      auto& out = next.block(k).values;
      const auto& old = result.table.block(k).values;
      for (std::size_t j = 0; j < out.size(); ++j) {
        if (config.averaging) {
          out[j] = 0.5 * (old[j] + out[j]);
        }
        sq += (out[j] - old[j]) * (out[j] - old[j]);
        ++count;
      }
    }
    next.sample_count = config.samples;
    next.seed = config.seed;
    next.basis_description = description;

    IterationReport rep;
    rep.iteration = r;
    rep.delta_norm = count > 0 ? std::sqrt(sq / static_cast<double>(count)) : 0.0;
    rep.jettisoned = solve.jettisoned;
    rep.sites = solve.sites;
    rep.endpoint_correlation = sym.endpoint_correlation;
    rep.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    for (const auto& w : solve.warnings) {
      result.warnings.push_back("iteration " + std::to_string(r) + ": " + w);
    }
    if (rep.delta_norm > previous_delta) {
      std::ostringstream msg;
      msg << "iteration " << r << ": coefficient change grew (" << rep.delta_norm << " > " << previous_delta << ")";
      result.warnings.push_back(msg.str());
    }
    previous_delta = rep.delta_norm;
    result.iterations.push_back(rep);
    result.table = std::move(next);
  }
  return result;
}

}  // namespace chainless
