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

// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <iomanip>
#include <iostream>
#include <numbers>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "chainless/exact_marginal.hpp"
#include "chainless/reference.hpp"
#include "chainless/sampler.hpp"
#include "config.hpp"
#include "experiments.hpp"

namespace chainless::tools {
namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

class Detail {
 public:
  template <class T>
  Detail& operator<<(const T& v) {
    os_ << v;
    return *this;
  }
  [[nodiscard]] std::string str() const { return os_.str(); }

 private:
  std::ostringstream os_ = [] {
    std::ostringstream o;
    o << std::setprecision(4);
    return o;
  }();
};

Outcome oracle_unbiased(int threads) {
  const auto t0 = Clock::now();
  const auto h = build_hierarchy_2d(4, 4);
  const auto c = CouplingField::uniform(h.lattice(), 1.0 / 2.2);
  const EnumerationOracle oracle{c};
  const double exact = exact_expectation(oracle, [](auto s) { return std::abs(magnetization(s)); });
  RunConfig config;
  config.side = 4;
  config.base_limit = 4;
  config.restrict_nonneg = false;
  const auto run = evaluate(config, h, c, 1, 10000, threads);
  std::vector<double> lw;
  std::vector<double> v;
  for (const auto& s : run.samples) {
    lw.push_back(s.log_weight);
    v.push_back(std::abs(magnetization(s.spins)));
  }
  const auto est = capped_weighted_mean(lw, v, kNoCap);
  const double secs = seconds_since(t0);
  const double z = std::abs(est.mean - exact) / est.error;
  Detail d;
  d << "E|mu| " << est.mean << " +- " << est.error << " vs exact " << exact << " (" << z << " SE), " << secs
    << " s";
  return {z <= 3.0 && secs < 60.0, d.str()};
}

Outcome zero_variance(int threads) {
  const auto h = build_hierarchy_2d(4, 4);
  const auto c = CouplingField::uniform(h.lattice(), 1.0 / 2.2);
  const EnumerationOracle oracle{c};
  const auto sampler = exact_sampler(oracle, h);
  auto samples = draw_samples(sampler, 1, StreamDomain::kTest, 0, 0, 10000, threads);
  center_log_weights(samples);
  double worst = 0.0;
  for (const auto& s : samples) {
    worst = std::max(worst, std::abs(s.log_weight));
  }
  double total = 0.0;
  oracle.for_each([&](std::uint32_t st, std::span<const std::int8_t>, double) {
    total += std::exp(sampler.log_probability(oracle.configuration(st)));
  });
  Detail d;
  d << "max |centered log w| " << worst << ", sum P0 - 1 = " << total - 1.0;
  return {worst <= 1e-10 && std::abs(total - 1.0) <= 1e-8, d.str()};
}

Outcome eq3_identity() {
  const auto h = build_hierarchy_2d(4, 4);
  const auto c = CouplingField::uniform(h.lattice(), 1.0 / 2.2);
  const EnumerationOracle oracle{c};
  double worst = 0.0;
  std::size_t points = 0;
  for (int lv = 1; lv <= h.base_level(); ++lv) {
    const auto& sites = h.level(lv).sites;
    for (std::uint32_t st = 0; st < (1U << sites.size()); ++st) {
      for (SiteId u : sites) {
        worst = std::max(worst, std::abs(exact_conditional_derivative(oracle, h, lv, u, st) -
                                         marginal_derivative_complex_step(oracle, h, lv, u, st)));
        ++points;
      }
    }
  }
  Detail d;
  d << points << " points, max deviation " << worst;
  return {worst <= 1e-10, d.str()};
}

Outcome table1(int threads) {
  const auto t0 = Clock::now();
  RunConfig config;
  config.threads = threads;
  const auto r = ising_magnetization(config);
  const auto& rows = r.mu.rows;
  const auto& last = rows.back();
  const bool value = std::abs(last.mean - 0.80) <= 0.03;
  const bool capped = last.fraction <= 0.01;
  const bool rises = rows.back().mean >= rows.front().mean;
  const bool plateau = r.mu.converged;
  Detail d;
  for (const auto& row : rows) {
    d << "logW=" << row.log_cap << ": f=" << row.fraction << " mu=" << row.mean << "+-" << row.error << "; ";
  }
  d << (value ? "" : "value off; ") << (capped ? "" : "f > 0.01; ") << (rises ? "" : "mean does not rise; ")
    << (plateau ? "" : "no plateau; ") << seconds_since(t0) << " s";
  return {value && capped && rises && plateau, d.str()};
}

Outcome table2(int threads) {
  const auto t0 = Clock::now();
  RunConfig config = command_defaults(Command::kIsingFlow);
  config.threads = threads;
  config.flow_samples = 100000;
  const auto r = ising_flow(config);
  const auto& lo = r.flows.front();
  const auto& hi = r.flows.back();
  const std::vector<double> expected_sums{1.63, 2.16, 2.71};
  bool values = lo.levels.size() == expected_sums.size();
  Detail d;
  for (std::size_t k = 0; k < r.temperatures.size(); ++k) {
    d << "T=" << r.temperatures[k] << " " << to_string(r.flows[k].trend) << "; ";
  }
  d << "T=2.20 sums";
  for (std::size_t i = 0; i < lo.levels.size(); ++i) {
    d << ' ' << lo.levels[i].statistic;
    values = values && std::abs(lo.levels[i].statistic - expected_sums[i]) <= 0.25;
  }
  const auto& b = r.bracket;
  const bool trends = lo.trend == Trend::kIncreasing && hi.trend == Trend::kDecreasing;
  const bool bracket = b.bifurcation && b.lower < 2.269 && 2.269 < b.upper && b.width() <= 0.15 &&
                       std::abs(b.midpoint() - 2.29) <= 0.05;
  d << "; bracket ";
  if (b.bifurcation) {
    d << b.lower << ".." << b.upper;
  } else {
    d << "none";
  }
  d << "; " << (trends ? "" : "trends off; ") << (bracket ? "" : "bracket off; ") << (values ? "" : "values off; ")
    << seconds_since(t0) << " s";
  return {trends && bracket && values, d.str()};
}

Outcome beta_zero(int threads) {
  RunConfig config;
  config.threads = threads;
  for (const auto& c : validation_suite(config)) {
    if (c.name == "beta-zero") {
      return {c.pass, c.detail};
    }
  }
  return {false, "beta-zero check missing"};
}

Outcome ea_desk(int threads, int realizations) {
  const auto t0 = Clock::now();
  RunConfig config = command_defaults(Command::kEaBinder);
  config.realizations = realizations;
  config.pt_sweeps = 20000;
  config.threads = threads;
  const auto r = ea_binder(config, "");
  bool close = true;
  bool monotone = true;
  Detail d;
  double prev = 2.0;
  for (const auto& row : r.rows) {
    const double g = row.chainless.g;
    d << "T=" << row.temperature << " g=" << g << "+-" << row.chainless.error;
    if (row.tempering) {
      d << " pt=" << row.tempering->g;
      if (row.temperature < 2.4) {
        close = close && std::abs(g - row.tempering->g) <= 0.05;
      }
    }
    d << "; ";
    monotone = monotone && g <= prev + row.chainless.error;
    prev = g;
  }
  const double g_hot = r.rows.back().chainless.g;
  const double floor = 1.0 / 64.0;
  const bool approach = g_hot > floor && g_hot < r.rows.front().chainless.g && g_hot - floor < 0.1;
  d << r.rows.front().chainless.realizations << " realizations, " << r.redraws << " redraws; "
    << (close ? "" : "baseline off; ") << (monotone ? "" : "not monotone; ") << (approach ? "" : "floor off; ")
    << seconds_since(t0) << " s";
  return {close && monotone && approach, d.str()};
}

Outcome ea_flow_qualitative(int threads) {
  const auto t0 = Clock::now();
  RunConfig config = command_defaults(Command::kEaFlow);
  config.threads = threads;
  const auto r = ea_flow(config);
  Detail d;
  bool finite = true;
  for (const auto& row : r.rows) {
    d << "T=" << row.temperature;
    for (std::size_t i = 0; i < row.levels.size(); ++i) {
      d << " i=" << row.levels[i] << ":" << row.mean[i];
      finite = finite && std::isfinite(row.mean[i]);
    }
    d << " " << to_string(row.trend) << "; ";
  }
  const bool completed = r.rows.size() == 3 && r.rows.front().temperature == 0.6 && finite;
  d << (r.bracket.bifurcation ? "bifurcation found; " : "no bifurcation; ") << seconds_since(t0) << " s";
  return {completed && !r.bracket.bifurcation, d.str()};
}

double per_sample_seconds(int side) {
  const auto h = build_hierarchy_2d(side);
  const auto c = CouplingField::uniform(h.lattice(), 1.0 / 2.2);
  const auto bases = sampling_bases(h);
  const ChainlessSampler sampler{h, c, CoefficientTable{bases, 0.2}, true};
  const std::size_t n = side <= 16 ? 4000 : 1000;
  double best = 1e300;
  for (int rep = 0; rep < 3; ++rep) {
    const auto t0 = Clock::now();
    const auto s = draw_samples(sampler, 3, StreamDomain::kTest, static_cast<std::uint64_t>(rep), 0, n, 1);
    best = std::min(best, seconds_since(t0) / static_cast<double>(s.size()));
  }
  return best;
}

Outcome cost_scaling(int threads) {
  const double t16 = per_sample_seconds(16);
  const double t32 = per_sample_seconds(32);
  const double ratio = t32 / t16;

  RunConfig config;
  config.threads = threads;
  const auto h = build_hierarchy_2d(16);
  const auto c = CouplingField::uniform(h.lattice(), 1.0 / 2.2);
  const auto run = evaluate(config, h, c, config.seed, config.samples, threads);
  std::vector<double> mu;
  for (const auto& s : run.samples) {
    mu.push_back(magnetization(s.spins));
  }
  const double n = static_cast<double>(mu.size());
  double mean = 0.0;
  for (double m : mu) {
    mean += m / n;
  }
  double c0 = 0.0;
  double c1 = 0.0;
  for (std::size_t i = 0; i < mu.size(); ++i) {
    c0 += (mu[i] - mean) * (mu[i] - mean);
    if (i + 1 < mu.size()) {
      c1 += (mu[i] - mean) * (mu[i + 1] - mean);
    }
  }
  const double rho = c1 / c0;
  const double bound = 3.0 / std::sqrt(n);
  Detail d;
  d << "per-sample " << t16 * 1e6 << " us (N=16), " << t32 * 1e6 << " us (N=32), ratio " << ratio
    << "; lag-1 autocorrelation " << rho << " (bound " << bound << ")";
  return {ratio >= 3.0 && ratio <= 5.0 && std::abs(rho) <= bound, d.str()};
}

}  // namespace
}  // namespace chainless::tools

int main(int argc, char** argv) {
  using namespace chainless::tools;
  CLI::App app{"chainless acceptance run"};
  int threads = 1;
  int realizations = 100;
  std::vector<int> only;
  app.add_option("-j,--threads", threads, "worker threads")->check(CLI::PositiveNumber);
  app.add_option("--realizations", realizations, "EA realizations for criterion 7")->check(CLI::Range(2, 100000));
  app.add_option("--only", only, "run only these criteria")->check(CLI::Range(1, 9));
  CLI11_PARSE(app, argc, argv);

  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"oracle unbiasedness", [&] { return oracle_unbiased(threads); }},
      {"zero-variance exactness", [&] { return zero_variance(threads); }},
      {"marginal derivative identity", [] { return eq3_identity(); }},
      {"Ising N=16 magnetization table", [&] { return table1(threads); }},
      {"Ising coefficient flow", [&] { return table2(threads); }},
      {"infinite-temperature suite", [&] { return beta_zero(threads); }},
      {"EA desk-scale Binder ratio", [&] { return ea_desk(threads, realizations); }},
      {"EA coefficient flow", [&] { return ea_flow_qualitative(threads); }},
      {"cost scaling", [&] { return cost_scaling(threads); }},
  };
  const std::set<int> selected(only.begin(), only.end());
  int failures = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    const int id = static_cast<int>(k) + 1;
    if (!selected.empty() && selected.count(id) == 0) {
      continue;
    }
    Outcome o;
    try {
      o = criteria[k].second();
    } catch (const std::exception& e) {
      o = {false, std::string{"exception: "} + e.what()};
    }
    failures += o.pass ? 0 : 1;
    std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << id << " (" << criteria[k].first << "): " << o.detail
              << std::endl;
  }
  return failures == 0 ? 0 : 1;
}
