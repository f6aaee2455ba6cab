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

#ifndef CHAINLESS_BOOTSTRAP_HPP
#define CHAINLESS_BOOTSTRAP_HPP

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "chainless/basis.hpp"
#include "chainless/lattice.hpp"
#include "chainless/marginal.hpp"
#include "chainless/model.hpp"

namespace chainless {

struct BootstrapConfig {
  /// Starting value of every coefficient.
  double initial = 0.3;
  int iterations = 2;
  int samples = 1000;
  /// a_r = (a_{r-1} + a_new) / 2 when set, a_r = a_new otherwise.
  bool averaging = true;
  bool restrict_nonneg = false;
  std::uint64_t seed = 0;
  int threads = 1;
  SolvePolicy policy{};
};

struct IterationReport {
  int iteration = 0;
  /// Root-mean-square change of the stored coefficients in this round.
  double delta_norm = 0.0;
  std::size_t jettisoned = 0;
  std::size_t sites = 0;
  double endpoint_correlation = 0.0;
  double seconds = 0.0;
};

struct BootstrapResult {
  CoefficientTable table;
  std::vector<IterationReport> iterations;
  std::vector<std::string> warnings;
};

/// Throws std::invalid_argument when the config cannot be run on `bases`.
void validate(const BootstrapConfig& config, std::span<const BasisSet> bases);

/// Fixed-point iteration for the sampling coefficients, starting from the constant config.initial.
[[nodiscard]] BootstrapResult run_bootstrap(const BootstrapConfig& config, const LevelHierarchy& hierarchy,
                                            std::span<const BasisSet> bases, const CouplingField& couplings);

/// Same, starting from `start` (which must be shaped like `bases`).
[[nodiscard]] BootstrapResult run_bootstrap(const BootstrapConfig& config, const LevelHierarchy& hierarchy,
                                            std::span<const BasisSet> bases, const CouplingField& couplings,
                                            CoefficientTable start);

}  // namespace chainless

#endif  // CHAINLESS_BOOTSTRAP_HPP
