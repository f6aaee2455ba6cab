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

#include "chainless/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "chainless/basis.hpp"

namespace chainless {

CapResult capped_weighted_mean(std::span<const double> log_weights, std::span<const double> values,
                               double log_cap) {
  if (log_weights.empty()) {
    throw std::invalid_argument("capped mean of an empty batch");
  }
  if (log_weights.size() != values.size()) {
    throw std::invalid_argument("one value per weight required");
  }
  // Work relative to the largest capped log-weight so nothing overflows.
  double top = -std::numeric_limits<double>::infinity();
  for (double l : log_weights) {
    top = std::max(top, std::min(l, log_cap));
  }
  CapResult out;
  out.log_cap = log_cap;
  std::size_t at_cap = 0;
  double below = 0.0;
  ObservableAccumulator acc;
  for (std::size_t i = 0; i < log_weights.size(); ++i) {
    const double l = log_weights[i];
    if (l >= log_cap) {
      ++at_cap;
    } else if (std::isfinite(log_cap)) {
      below += std::exp(l - log_cap);
    }
    acc.add(std::exp(std::min(l, log_cap) - top), values[i]);
  }
  const auto n = static_cast<double>(log_weights.size());
  out.fraction = static_cast<double>(at_cap) / n;
  out.effective_count = static_cast<double>(at_cap) + below;
  out.kish_count = acc.kish_count();
  out.mean = acc.mean();
  out.error = acc.error();
  return out;
}

CapReport cap_sweep(std::span<const double> log_weights, std::span<const double> values,
                    std::span<const double> log_caps) {
  if (log_caps.empty()) {
    throw std::invalid_argument("cap grid is empty");
  }
  for (std::size_t k = 1; k < log_caps.size(); ++k) {
    if (!(log_caps[k] > log_caps[k - 1])) {
      throw std::invalid_argument("cap grid must be strictly increasing");
    }
  }
  CapReport rep;
  for (double c : log_caps) {
    rep.rows.push_back(capped_weighted_mean(log_weights, values, c));
  }
  if (rep.rows.size() >= 2) {
    const auto& a = rep.rows[rep.rows.size() - 2];
    const auto& b = rep.rows.back();
    rep.converged = std::abs(a.mean - b.mean) <= a.error + b.error;
  }
  return rep;
}

double magnetization(std::span<const std::int8_t> spins) noexcept {
  if (spins.empty()) {
    return 0.0;
  }
  long sum = 0;
  for (auto s : spins) {
    sum += s;
  }
  return static_cast<double>(sum) / static_cast<double>(spins.size());
}

double magnetization(const SpinConfiguration& spins) noexcept { return magnetization(spins.values()); }

double overlap(const SpinConfiguration& a, const SpinConfiguration& b) {
  if (a.size() != b.size()) {
    throw SizeMismatch("overlap of configurations on different lattices");
  }
  const auto va = a.values();
  const auto vb = b.values();
  long sum = 0;
  for (std::size_t i = 0; i < va.size(); ++i) {
    sum += va[i] * vb[i];
  }
  return static_cast<double>(sum) / static_cast<double>(va.size());
}

// ---------------------------------------------------------------------------

void ObservableAccumulator::add(double weight, double value) noexcept {
  ++count_;
  sw_ += weight;
  sw2_ += weight * weight;
  swh_ += weight * value;
  swh2_ += weight * value * value;
}

void ObservableAccumulator::merge(const ObservableAccumulator& other) noexcept {
  count_ += other.count_;
  sw_ += other.sw_;
  sw2_ += other.sw2_;
  swh_ += other.swh_;
  swh2_ += other.swh2_;
}

double ObservableAccumulator::mean() const {
  if (!(sw_ > 0.0)) {
    throw std::domain_error("weighted mean with zero total weight");
  }
  return swh_ / sw_;
}

double ObservableAccumulator::variance() const {
  const double m = mean();
  return std::max(0.0, swh2_ / sw_ - m * m);
}

double ObservableAccumulator::kish_count() const noexcept { return sw2_ > 0.0 ? sw_ * sw_ / sw2_ : 0.0; }

double ObservableAccumulator::error() const {
  const double n = kish_count();
  return n > 1.0 ? std::sqrt(variance() / (n - 1.0)) : std::numeric_limits<double>::infinity();
}

// ---------------------------------------------------------------------------

ThermalMoments overlap_moments(std::span<const WeightedSample> samples, double log_cap) {
  const std::size_t pairs = samples.size() / 2;
  if (pairs == 0) {
    throw std::invalid_argument("overlap moments need at least two samples");
  }
  std::vector<double> lw(pairs);
  std::vector<double> q(pairs);
  for (std::size_t k = 0; k < pairs; ++k) {
    lw[k] = std::min(samples[2 * k].log_weight + samples[2 * k + 1].log_weight, log_cap);
    q[k] = overlap(samples[2 * k].spins, samples[2 * k + 1].spins);
  }
  const double top = *std::max_element(lw.begin(), lw.end());
  ObservableAccumulator a2;
  ObservableAccumulator a4;
  for (std::size_t k = 0; k < pairs; ++k) {
    const double w = std::exp(lw[k] - top);
    const double q2 = q[k] * q[k];
    a2.add(w, q2);
    a4.add(w, q2 * q2);
  }
  return {a2.mean(), a4.mean(), pairs, a2.kish_count()};
}

double binder_value(double q2, double q4) {
  if (!(q2 > 0.0)) {
    throw std::domain_error("Binder ratio needs a positive second moment");
  }
  return 0.5 * (3.0 - q4 / (q2 * q2));
}

BinderEstimate binder_ratio(std::span<const ThermalMoments> realizations, std::size_t batches) {
  const std::size_t r = realizations.size();
  if (r < 2) {
    throw std::invalid_argument("disorder-averaged Binder ratio needs at least two realizations");
  }
  auto g_of = [&](std::size_t lo, std::size_t hi) {
    double s2 = 0.0;
    double s4 = 0.0;
    for (std::size_t k = lo; k < hi; ++k) {
      s2 += realizations[k].q2;
      s4 += realizations[k].q4;
    }
    const auto n = static_cast<double>(hi - lo);
    return binder_value(s2 / n, s4 / n);
  };
  BinderEstimate est;
  est.realizations = r;
  est.g = g_of(0, r);
  est.batches = std::clamp<std::size_t>(batches, 2, r);
  std::vector<double> gb;
  for (std::size_t b = 0; b < est.batches; ++b) {
    gb.push_back(g_of(b * r / est.batches, (b + 1) * r / est.batches));
  }
  double m = 0.0;
  for (double g : gb) {
    m += g;
  }
  m /= static_cast<double>(gb.size());
  double v = 0.0;
  for (double g : gb) {
    v += (g - m) * (g - m);
  }
  v /= static_cast<double>(gb.size() - 1);
  est.error = std::sqrt(v / static_cast<double>(gb.size()));
  return est;
}

// ---------------------------------------------------------------------------

std::string to_string(Trend trend) {
  switch (trend) {
    case Trend::kIncreasing:
      return "increasing";
    case Trend::kDecreasing:
      return "decreasing";
    case Trend::kMixed:
      return "mixed";
  }
  return "mixed";
}

std::vector<int> similar_levels(int dim, int side) {
  if (dim != 2 && dim != 3) {
    throw GeometryError("dimension must be 2 or 3");
  }
  std::vector<int> out;
  for (int i = dim;; i += dim) {
    const int a = level_spacing(dim, i);
    if (side / a < 2) {
      break;
    }
    out.push_back(i);
  }
  return out;
}

FlowResult flow_diagnostic(const Lattice& lattice, std::span<const int> levels,
                           std::span<const SpinConfiguration> samples, const CouplingField& couplings,
                           FlowStatistic statistic, std::span<const double> weights, int threads) {
  if (levels.empty()) {
    throw std::invalid_argument("flow diagnostic needs at least one level");
  }
  std::vector<BasisSet> bases;
  for (int lv : levels) {
    const auto shape = level_shape(lattice.dim(), lv);
    if (shape != LevelShape::kSquare && shape != LevelShape::kCubic) {
      throw GeometryError("flow levels must be mutually similar (square or cubic); level " + std::to_string(lv) +
                          " is " + to_string(shape));
    }
    bases.push_back(diagnostic_basis(lattice, lv));
  }
  const auto systems = accumulate_projection(samples, bases, couplings, weights, threads);
  SolvePolicy policy;
  policy.method = SolveMethod::kMinimumNorm;
  const auto table = solve_coefficients(systems, bases, policy);

  FlowResult out;
  std::vector<double> stats;
  for (std::size_t k = 0; k < bases.size(); ++k) {
    const auto& block = table.block(k);
    const std::size_t terms = bases[k].terms.size();
    FlowLevel fl;
    fl.level = bases[k].level;
    fl.spacing = bases[k].spacing;
    fl.sites = block.sites.size();
    fl.mean_coefficients.assign(terms, 0.0);
    fl.mean_abs_coefficients.assign(terms, 0.0);
    for (std::size_t u = 0; u < block.sites.size(); ++u) {
      for (std::size_t p = 0; p < terms; ++p) {
        const double a = block.values[block.offsets[u] + p];
        fl.mean_coefficients[p] += a;
        fl.mean_abs_coefficients[p] += std::abs(a);
      }
    }
    const auto n = static_cast<double>(block.sites.size());
    for (std::size_t p = 0; p < terms; ++p) {
      fl.mean_coefficients[p] /= n;
      fl.mean_abs_coefficients[p] /= n;
      fl.statistic += statistic == FlowStatistic::kSum ? fl.mean_coefficients[p] : fl.mean_abs_coefficients[p];
    }
    stats.push_back(fl.statistic);
    out.levels.push_back(std::move(fl));
  }
  out.trend = classify_trend(stats);
  return out;
}

Trend classify_trend(std::span<const double> values) noexcept {
  if (values.size() < 2) {
    return Trend::kMixed;
  }
  bool up = true;
  bool down = true;
  for (std::size_t k = 1; k < values.size(); ++k) {
    up = up && values[k] > values[k - 1];
    down = down && values[k] < values[k - 1];
  }
  return up ? Trend::kIncreasing : (down ? Trend::kDecreasing : Trend::kMixed);
}

FlowBracket flow_bracket(std::span<const double> temperatures, std::span<const Trend> trends) {
  if (temperatures.size() != trends.size()) {
    throw std::invalid_argument("one trend per temperature required");
  }
  FlowBracket br;
  for (std::size_t i = 0; i < trends.size(); ++i) {
    if (trends[i] != Trend::kIncreasing) {
      continue;
    }
    double upper = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < trends.size(); ++j) {
      if (trends[j] == Trend::kDecreasing && temperatures[j] > temperatures[i]) {
        upper = std::min(upper, temperatures[j]);
      }
    }
    if (std::isfinite(upper) && (!br.bifurcation || temperatures[i] > br.lower)) {
      br.bifurcation = true;
      br.lower = temperatures[i];
      br.upper = upper;
    }
  }
  return br;
}

}  // namespace chainless
