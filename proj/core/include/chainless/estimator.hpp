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

#ifndef CHAINLESS_ESTIMATOR_HPP
#define CHAINLESS_ESTIMATOR_HPP

#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "chainless/marginal.hpp"
#include "chainless/model.hpp"
#include "chainless/sampler.hpp"

namespace chainless {

inline constexpr double kNoCap = std::numeric_limits<double>::infinity();

/// One row of a cap sweep. Weights are exp(log_weight) of centered log-weights.
struct CapResult {
  double log_cap = kNoCap;
  /// Fraction of samples with w >= W.
  double fraction = 0.0;
  /// N_W + sum over w < W of w / W.
  double effective_count = 0.0;
  /// (sum w')^2 / sum w'^2, used for the error bar.
  double kish_count = 0.0;
  double mean = 0.0;
  double error = 0.0;
};

/// Weighted mean of `values` with weights min(w, W), W = exp(log_cap). Throws on an empty batch.
[[nodiscard]] CapResult capped_weighted_mean(std::span<const double> log_weights, std::span<const double> values,
                                             double log_cap);

struct CapReport {
  std::vector<CapResult> rows;
  /// Last two caps agree within their summed error bars.
  bool converged = false;
};

/// Cap sweep over a strictly increasing grid of log W values.
[[nodiscard]] CapReport cap_sweep(std::span<const double> log_weights, std::span<const double> values,
                                  std::span<const double> log_caps);

[[nodiscard]] double magnetization(std::span<const std::int8_t> spins) noexcept;
[[nodiscard]] double magnetization(const SpinConfiguration& spins) noexcept;
/// Site-averaged product of two configurations; throws on a size mismatch.
[[nodiscard]] double overlap(const SpinConfiguration& a, const SpinConfiguration& b);

/// Running weighted sums of one observable. Merging equals accumulating the concatenated stream.
class ObservableAccumulator {
 public:
  void add(double weight, double value) noexcept;
  void merge(const ObservableAccumulator& other) noexcept;

  [[nodiscard]] std::int64_t count() const noexcept { return count_; }
  [[nodiscard]] double sum_weight() const noexcept { return sw_; }
  [[nodiscard]] double mean() const;
  [[nodiscard]] double variance() const;
  [[nodiscard]] double kish_count() const noexcept;
  [[nodiscard]] double error() const;

 private:
  std::int64_t count_ = 0;
  double sw_ = 0.0;
  double sw2_ = 0.0;
  double swh_ = 0.0;
  double swh2_ = 0.0;
};

/// Thermal overlap moments of one disorder realization.
struct ThermalMoments {
  double q2 = 0.0;
  double q4 = 0.0;
  std::size_t pairs = 0;
  double kish_pairs = 0.0;
};

/// Moments from disjoint pairs (0,1), (2,3), ... with pair weight w1*w2 capped at exp(log_cap).
[[nodiscard]] ThermalMoments overlap_moments(std::span<const WeightedSample> samples, double log_cap = kNoCap);

struct BinderEstimate {
  double g = 0.0;
  /// Scatter of g over batches of realizations.
  double error = 0.0;
  std::size_t realizations = 0;
  std::size_t batches = 0;
};

/// g = 0.5 (3 - [q4] / [q2]^2) from a single set of moments (no error bar).
[[nodiscard]] double binder_value(double q2, double q4);
/// Disorder-averaged g; needs at least two realizations.
[[nodiscard]] BinderEstimate binder_ratio(std::span<const ThermalMoments> realizations, std::size_t batches = 10);

// ---------------------------------------------------------------------------
// Coefficient flow

enum class FlowStatistic {
  kSum,     ///< sum over terms of the site-averaged coefficient
  kSumAbs,  ///< sum over terms of the site average of |coefficient|
};

enum class Trend { kIncreasing, kDecreasing, kMixed };
[[nodiscard]] std::string to_string(Trend trend);

struct FlowLevel {
  int level = 0;
  int spacing = 0;
  double statistic = 0.0;
  std::vector<double> mean_coefficients;
  std::vector<double> mean_abs_coefficients;
  std::size_t sites = 0;
};

struct FlowResult {
  std::vector<FlowLevel> levels;
  Trend trend = Trend::kMixed;
};

/// Levels i = 2, 4, ... (2D) or 3, 6, ... (3D) that carry at least two sites per axis.
[[nodiscard]] std::vector<int> similar_levels(int dim, int side);

/// Projects W0' onto the diagnostic basis at each level using the same samples. `weights` (empty for
/// plain averages) reweights the samples toward the target distribution.
[[nodiscard]] FlowResult flow_diagnostic(const Lattice& lattice, std::span<const int> levels,
                                         std::span<const SpinConfiguration> samples, const CouplingField& couplings,
                                         FlowStatistic statistic, std::span<const double> weights = {},
                                         int threads = 1);

[[nodiscard]] Trend classify_trend(std::span<const double> values) noexcept;

struct FlowBracket {
  /// Some temperature grows while a higher one decays.
  bool bifurcation = false;
  double lower = std::numeric_limits<double>::quiet_NaN();
  double upper = std::numeric_limits<double>::quiet_NaN();
  [[nodiscard]] double midpoint() const noexcept { return 0.5 * (lower + upper); }
  [[nodiscard]] double width() const noexcept { return upper - lower; }
};

/// Bracket (largest increasing T, smallest decreasing T above it). `temperatures` need not be sorted.
[[nodiscard]] FlowBracket flow_bracket(std::span<const double> temperatures, std::span<const Trend> trends);

}  // namespace chainless

#endif  // CHAINLESS_ESTIMATOR_HPP
