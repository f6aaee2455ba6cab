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

#ifndef CHAINLESS_TOOLS_EXPERIMENTS_HPP
#define CHAINLESS_TOOLS_EXPERIMENTS_HPP

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "chainless/bootstrap.hpp"
#include "chainless/estimator.hpp"
#include "config.hpp"

namespace chainless::tools {

/// Bootstrap then draw `config.samples` centered evaluation samples at one coupling field.
struct EvaluationRun {
  BootstrapResult bootstrap;
  std::vector<WeightedSample> samples;
};

[[nodiscard]] EvaluationRun evaluate(const RunConfig& config, const LevelHierarchy& hierarchy,
                                     const CouplingField& couplings, std::uint64_t seed, int samples, int threads);

struct MagnetizationResult {
  EvaluationRun run;
  CapReport mu;
  CapReport abs_mu;
  /// E[|mu|] and its naive error from the Metropolis reference, when requested.
  std::optional<std::pair<double, double>> metropolis;
};

[[nodiscard]] MagnetizationResult ising_magnetization(const RunConfig& config);
void write_magnetization(std::ostream& os, const RunConfig& config, const MagnetizationResult& result);

struct IsingFlowResult {
  std::vector<double> temperatures;
  std::vector<FlowResult> flows;
  FlowBracket bracket;
};

[[nodiscard]] IsingFlowResult ising_flow(const RunConfig& config);
void write_flow(std::ostream& os, const RunConfig& config, const IsingFlowResult& result);

struct Histogram {
  double low = 0.0;
  double width = 0.0;
  std::vector<std::size_t> counts;
  double mean = 0.0;
  double stddev = 0.0;
};

/// Equal-width histogram over [min, max] of `values`; a constant input fills a single bin.
[[nodiscard]] Histogram histogram(std::span<const double> values, int bins);
[[nodiscard]] Histogram weight_histogram(const RunConfig& config);
void write_histogram(std::ostream& os, const RunConfig& config, const Histogram& h);

struct RealizationMoments {
  int realization = 0;
  int attempt = 0;
  std::uint64_t disorder_seed = 0;
  std::string method;  ///< chainless | pt
  double temperature = 0.0;
  ThermalMoments moments;
  std::size_t jettisoned = 0;
  std::size_t sites = 0;
};

struct BinderRow {
  double temperature = 0.0;
  BinderEstimate chainless;
  std::optional<BinderEstimate> tempering;
};

struct EaBinderResult {
  std::vector<BinderRow> rows;
  std::vector<RealizationMoments> moments;
  int redraws = 0;
  int resumed = 0;
  std::vector<double> swap_acceptance;
};

/// Per-realization moments are appended to `moments_path` (if not empty) as they complete; realizations
/// already present there are reused rather than recomputed.
[[nodiscard]] EaBinderResult ea_binder(const RunConfig& config, const std::string& moments_path);
void write_binder(std::ostream& os, const RunConfig& config, const EaBinderResult& result);

struct EaFlowRow {
  double temperature = 0.0;
  std::vector<int> levels;
  std::vector<double> mean;
  std::vector<double> error;
  Trend trend = Trend::kMixed;
};

struct EaFlowResult {
  std::vector<EaFlowRow> rows;
  FlowBracket bracket;
};

[[nodiscard]] EaFlowResult ea_flow(const RunConfig& config);
void write_ea_flow(std::ostream& os, const RunConfig& config, const EaFlowResult& result);

struct Check {
  std::string name;
  bool pass = false;
  std::string detail;
};

/// Oracle suites on enumerable lattices plus an optional coefficient-table load check.
[[nodiscard]] std::vector<Check> validation_suite(const RunConfig& config);
void write_checks(std::ostream& os, std::span<const Check> checks);

}  // namespace chainless::tools

#endif  // CHAINLESS_TOOLS_EXPERIMENTS_HPP
