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

#include "experiments.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <iomanip>
#include <map>
#include <mutex>
#include <numbers>
#include <ostream>
#include <set>
#include <sstream>

#include "chainless/exact_marginal.hpp"
#include "chainless/parallel.hpp"
#include "chainless/reference.hpp"
#include "chainless/sampler.hpp"

namespace chainless::tools {

namespace {

bool restricted(const RunConfig& c) { return c.restrict_nonneg && c.model == ModelKind::kIsing; }

std::vector<double> log_weights_of(std::span<const WeightedSample> samples) {
  std::vector<double> out;
  out.reserve(samples.size());
  for (const auto& s : samples) {
    out.push_back(s.log_weight);
  }
  return out;
}

void write_bootstrap_header(std::ostream& os, const BootstrapResult& b) {
  std::istringstream desc{b.table.basis_description};
  for (std::string line; std::getline(desc, line);) {
    os << "# basis " << line << '\n';
  }
  for (const auto& it : b.iterations) {
    os << "# bootstrap iteration=" << it.iteration << " delta_rms=" << it.delta_norm << " jettisoned=" << it.jettisoned
       << "/" << it.sites << " endpoint_correlation=" << it.endpoint_correlation << '\n';
  }
  for (const auto& w : b.warnings) {
    os << "# warning " << w << '\n';
  }
}

}  // namespace

EvaluationRun evaluate(const RunConfig& config, const LevelHierarchy& hierarchy, const CouplingField& couplings,
                       std::uint64_t seed, int samples, int threads) {
  const auto bases = sampling_bases(hierarchy);
  BootstrapConfig bc;
  bc.initial = config.initial;
  bc.iterations = config.iterations;
  bc.samples = config.bootstrap_samples;
  bc.averaging = config.averaging;
  bc.restrict_nonneg = restricted(config);
  bc.seed = seed;
  bc.threads = threads;
  EvaluationRun run;
  run.bootstrap = run_bootstrap(bc, hierarchy, bases, couplings);
  const ChainlessSampler sampler{hierarchy, couplings, run.bootstrap.table, bc.restrict_nonneg};
  run.samples = draw_samples(sampler, seed, StreamDomain::kEvaluation, 0, 0, static_cast<std::size_t>(samples), threads);
  center_log_weights(run.samples);
  return run;
}

// ---------------------------------------------------------------------------
// Ising magnetization

MagnetizationResult ising_magnetization(const RunConfig& config) {
  validate(config, Command::kIsingMag);
  const auto hierarchy = build_hierarchy(2, config.side, config.base_limit);
  const auto couplings = CouplingField::uniform(hierarchy.lattice(), 1.0 / config.temperatures.front());
  MagnetizationResult out;
  out.run = evaluate(config, hierarchy, couplings, config.seed, config.samples, config.threads);
  const auto lw = log_weights_of(out.run.samples);
  std::vector<double> mu;
  std::vector<double> abs_mu;
  for (const auto& s : out.run.samples) {
    mu.push_back(magnetization(s.spins));
    abs_mu.push_back(std::abs(mu.back()));
  }
  out.mu = cap_sweep(lw, mu, config.caps);
  out.abs_mu = cap_sweep(lw, abs_mu, config.caps);
  if (config.metropolis_sweeps > 0) {
    // Batch means over 20 blocks for the error bar.
    constexpr std::size_t kBlocks = 20;
    const std::size_t per_block = std::max<std::size_t>(1, config.metropolis_sweeps / kBlocks);
    std::vector<double> block(kBlocks, 0.0);
    metropolis_chain(couplings, per_block * kBlocks, config.metropolis_sweeps / 10, config.seed,
                     [&](std::size_t k, const SpinConfiguration& s) {
                       block[k / per_block] += std::abs(magnetization(s)) / static_cast<double>(per_block);
                     });
    double m = 0.0;
    for (double b : block) {
      m += b / kBlocks;
    }
    double v = 0.0;
    for (double b : block) {
      v += (b - m) * (b - m) / (kBlocks - 1);
    }
    out.metropolis = std::make_pair(m, std::sqrt(v / kBlocks));
  }
  return out;
}

void write_magnetization(std::ostream& os, const RunConfig& config, const MagnetizationResult& r) {
  write_header(os, config, Command::kIsingMag);
  write_bootstrap_header(os, r.run.bootstrap);
  os << "# samples=" << r.run.samples.size() << " converged_mu=" << (r.mu.converged ? "yes" : "no")
     << " converged_abs_mu=" << (r.abs_mu.converged ? "yes" : "no") << '\n';
  if (r.metropolis) {
    os << "# metropolis_abs_mu=" << r.metropolis->first << " err=" << r.metropolis->second << '\n';
  }
  os << std::setprecision(10);
  os << "log_w,f,effective_count,kish_count,mean_mu,err_mu,mean_abs_mu,err_abs_mu\n";
  for (std::size_t k = 0; k < r.mu.rows.size(); ++k) {
    const auto& a = r.mu.rows[k];
    const auto& b = r.abs_mu.rows[k];
    os << a.log_cap << ',' << a.fraction << ',' << a.effective_count << ',' << a.kish_count << ',' << a.mean << ','
       << a.error << ',' << b.mean << ',' << b.error << '\n';
  }
}

// ---------------------------------------------------------------------------
// Coefficient flow, Ising

IsingFlowResult ising_flow(const RunConfig& config) {
  validate(config, Command::kIsingFlow);
  const auto hierarchy = build_hierarchy(2, config.side, config.base_limit);
  const auto levels = similar_levels(2, config.side);
  IsingFlowResult out;
  out.temperatures = config.temperatures;
  std::vector<Trend> trends;
  for (std::size_t k = 0; k < config.temperatures.size(); ++k) {
    const auto couplings = CouplingField::uniform(hierarchy.lattice(), 1.0 / config.temperatures[k]);
    const auto seed = derive_seed(config.seed, StreamDomain::kDiagnostic, k);
    const auto run = evaluate(config, hierarchy, couplings, seed, config.flow_samples, config.threads);
    std::vector<SpinConfiguration> spins;
    std::vector<double> weights;
    for (const auto& s : run.samples) {
      spins.push_back(s.spins);
      weights.push_back(std::exp(std::min(s.log_weight, config.flow_log_cap)));
    }
    out.flows.push_back(flow_diagnostic(hierarchy.lattice(), levels, spins, couplings, FlowStatistic::kSum, weights,
                                        config.threads));
    trends.push_back(out.flows.back().trend);
  }
  out.bracket = flow_bracket(out.temperatures, trends);
  return out;
}

void write_flow(std::ostream& os, const RunConfig& config, const IsingFlowResult& r) {
  write_header(os, config, Command::kIsingFlow);
  os << "# statistic=sum of site-averaged diagnostic coefficients, weighted projection (log cap "
     << config.flow_log_cap << ")\n";
  if (r.bracket.bifurcation) {
    os << "# bracket lower=" << r.bracket.lower << " upper=" << r.bracket.upper << " midpoint=" << r.bracket.midpoint()
       << '\n';
  } else {
    os << "# bracket none\n";
  }
  os << std::setprecision(10);
  std::size_t terms = 0;
  for (const auto& f : r.flows) {
    for (const auto& lv : f.levels) {
      terms = std::max(terms, lv.mean_coefficients.size());
    }
  }
  os << "temperature,level,spacing,statistic,trend";
  for (std::size_t p = 1; p <= terms; ++p) {
    os << ",a" << p;
  }
  os << '\n';
  for (std::size_t k = 0; k < r.flows.size(); ++k) {
    for (const auto& lv : r.flows[k].levels) {
      os << r.temperatures[k] << ',' << lv.level << ',' << lv.spacing << ',' << lv.statistic << ','
         << to_string(r.flows[k].trend);
      for (double a : lv.mean_coefficients) {
        os << ',' << a;
      }
      os << '\n';
    }
  }
}

// ---------------------------------------------------------------------------
// Weight histogram

Histogram histogram(std::span<const double> values, int bins) {
  if (values.empty() || bins < 1) {
    throw std::invalid_argument("histogram needs values and at least one bin");
  }
  Histogram h;
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  h.low = *lo;
  h.width = *hi > *lo ? (*hi - *lo) / bins : 1.0;
  h.counts.assign(static_cast<std::size_t>(bins), 0);
  double s = 0.0;
  double s2 = 0.0;
  for (double v : values) {
    const auto k = std::min<std::size_t>(static_cast<std::size_t>((v - h.low) / h.width), h.counts.size() - 1);
    ++h.counts[k];
    s += v;
    s2 += v * v;
  }
  const auto n = static_cast<double>(values.size());
  h.mean = s / n;
  h.stddev = std::sqrt(std::max(0.0, s2 / n - h.mean * h.mean));
  return h;
}

Histogram weight_histogram(const RunConfig& config) {
  validate(config, Command::kWeightsHist);
  const auto hierarchy = build_hierarchy(config.dim, config.side, config.base_limit);
  const double beta = 1.0 / config.temperatures.front();
  const auto couplings = config.model == ModelKind::kIsing
                             ? CouplingField::uniform(hierarchy.lattice(), beta)
                             : draw_disorder(derive_seed(config.seed, StreamDomain::kRealization, 0),
                                             hierarchy.lattice(), beta);
  const auto run = evaluate(config, hierarchy, couplings, config.seed, config.samples, config.threads);
  return histogram(log_weights_of(run.samples), config.bins);
}

void write_histogram(std::ostream& os, const RunConfig& config, const Histogram& h) {
  write_header(os, config, Command::kWeightsHist);
  os << std::setprecision(10);
  os << "# mean_log_w=" << h.mean << " std_log_w=" << h.stddev << '\n';
  os << "bin_left,count\n";
  for (std::size_t k = 0; k < h.counts.size(); ++k) {
    os << h.low + static_cast<double>(k) * h.width << ',' << h.counts[k] << '\n';
  }
}

// ---------------------------------------------------------------------------
// Binder ratio, EA

namespace {

std::string binder_signature(const RunConfig& c) {
  std::ostringstream os;
  os << std::setprecision(17) << "# signature side=" << c.side << " seed=" << c.seed << " samples=" << c.samples
     << " bootstrap=" << c.initial << '/' << c.iterations << '/' << c.bootstrap_samples << '/' << c.averaging
     << " log_cap=" << c.binder_log_cap << " pt=" << c.pt_sweeps << '/' << c.pt_burn_in << '/' << c.pt_ladder
     << " temperatures=";
  for (double t : c.temperatures) {
    os << t << ';';
  }
  return os.str();
}

void write_moment_row(std::ostream& os, const RealizationMoments& m) {
  os << std::setprecision(17) << m.realization << ',' << m.attempt << ',' << m.disorder_seed << ',' << m.method << ','
     << m.temperature << ',' << m.moments.q2 << ',' << m.moments.q4 << ',' << m.moments.pairs << ','
     << m.moments.kish_pairs << ',' << m.jettisoned << ',' << m.sites << '\n';
}

RealizationMoments parse_moment_row(const std::string& line) {
  std::stringstream ss{line};
  std::vector<std::string> f;
  for (std::string item; std::getline(ss, item, ',');) {
    f.push_back(item);
  }
  if (f.size() != 11) {
    throw ConfigError("moments file: malformed row '" + line + "'");
  }
  try {
    RealizationMoments m;
    m.realization = std::stoi(f[0]);
    m.attempt = std::stoi(f[1]);
    m.disorder_seed = std::stoull(f[2]);
    m.method = f[3];
    m.temperature = std::stod(f[4]);
    m.moments.q2 = std::stod(f[5]);
    m.moments.q4 = std::stod(f[6]);
    m.moments.pairs = std::stoull(f[7]);
    m.moments.kish_pairs = std::stod(f[8]);
    m.jettisoned = std::stoull(f[9]);
    m.sites = std::stoull(f[10]);
    return m;
  } catch (const std::exception&) {
    throw ConfigError("moments file: malformed row '" + line + "'");
  }
}

struct RealizationOutcome {
  std::vector<RealizationMoments> rows;
  std::vector<double> swap_acceptance;
  int redraws = 0;
};

RealizationOutcome run_realization(const RunConfig& config, const LevelHierarchy& hierarchy, int r) {
  RealizationOutcome out;
  const SolvePolicy policy{};
  for (int attempt = 0;; ++attempt) {
    const auto dseed = derive_seed(config.seed, StreamDomain::kRealization, static_cast<std::uint64_t>(r),
                                   static_cast<std::uint64_t>(attempt));
    out.rows.clear();
    bool failed = false;
    for (std::size_t k = 0; k < config.temperatures.size(); ++k) {
      const double t = config.temperatures[k];
      const auto couplings = draw_disorder(dseed, hierarchy.lattice(), 1.0 / t);
      const auto run = evaluate(config, hierarchy, couplings, derive_seed(dseed, StreamDomain::kEvaluation, k),
                                config.samples, 1);
      const auto& last = run.bootstrap.iterations.back();
      failed = failed || static_cast<double>(last.jettisoned) > policy.alarm_fraction * static_cast<double>(last.sites);
      RealizationMoments m;
      m.realization = r;
      m.attempt = attempt;
      m.disorder_seed = dseed;
      m.method = "chainless";
      m.temperature = t;
      m.moments = overlap_moments(run.samples, config.binder_log_cap);
      m.jettisoned = last.jettisoned;
      m.sites = last.sites;
      out.rows.push_back(m);
    }
    if (failed && attempt < config.max_redraws) {
      ++out.redraws;
      continue;
    }
    if (config.pt_sweeps > 0) {
      TemperingConfig tc;
      tc.temperatures = merge_ladder(config.temperatures, geometric_ladder(0.5, 2.5, static_cast<std::size_t>(config.pt_ladder)));
      tc.sweeps = config.pt_sweeps;
      tc.burn_in = config.pt_burn_in;
      tc.seed = dseed;
      const auto pt = parallel_tempering(draw_disorder(dseed, hierarchy.lattice(), 1.0), tc);
      out.swap_acceptance = pt.swap_acceptance;
      for (double t : config.temperatures) {
        const auto it = std::find_if(pt.temperatures.begin(), pt.temperatures.end(),
                                     [&](double x) { return std::abs(x - t) <= 1e-9; });
        RealizationMoments m;
        m.realization = r;
        m.attempt = attempt;
        m.disorder_seed = dseed;
        m.method = "pt";
        m.temperature = t;
        m.moments = pt.moments[static_cast<std::size_t>(it - pt.temperatures.begin())];
        out.rows.push_back(m);
      }
    }
    return out;
  }
}

}  // namespace

EaBinderResult ea_binder(const RunConfig& config, const std::string& moments_path) {
  validate(config, Command::kEaBinder);
  const auto hierarchy = build_hierarchy(3, config.side, config.base_limit);
  const std::string signature = binder_signature(config);
  const std::size_t rows_per = config.temperatures.size() * (config.pt_sweeps > 0 ? 2 : 1);

  std::map<int, std::vector<RealizationMoments>> done;
  bool have_file = false;
  if (!moments_path.empty()) {
    std::ifstream in{moments_path};
    if (in) {
      std::string line;
      if (std::getline(in, line)) {
        have_file = true;
        if (line != signature) {
          throw ConfigError("moments file " + moments_path + " was written by a different configuration");
        }
        while (std::getline(in, line)) {
          if (line.empty() || line.front() == '#' || line.rfind("realization,", 0) == 0) {
            continue;
          }
          auto m = parse_moment_row(line);
          done[m.realization].push_back(m);
        }
      }
    }
  }
  std::ofstream append;
  if (!moments_path.empty()) {
    append.open(moments_path, std::ios::app);
    if (!append) {
      throw ConfigError("cannot write moments file " + moments_path);
    }
    if (!have_file) {
      append << signature << '\n'
             << "realization,attempt,disorder_seed,method,temperature,q2,q4,pairs,kish_pairs,jettisoned,sites\n";
    }
  }

  EaBinderResult out;
  std::vector<std::vector<RealizationMoments>> per(static_cast<std::size_t>(config.realizations));
  std::vector<int> todo;
  for (int r = 0; r < config.realizations; ++r) {
    auto it = done.find(r);
    if (it != done.end() && it->second.size() == rows_per) {
      per[static_cast<std::size_t>(r)] = it->second;
      ++out.resumed;
    } else {
      todo.push_back(r);
    }
  }
  std::vector<double> swap_sum;
  std::size_t swap_count = 0;
  // Chunks of `threads` realizations run in parallel; results are appended in realization order.
  const auto chunk = static_cast<std::size_t>(config.threads);
  for (std::size_t lo = 0; lo < todo.size(); lo += chunk) {
    const std::size_t hi = std::min(todo.size(), lo + chunk);
    std::vector<RealizationOutcome> results(hi - lo);
    parallel_for(hi - lo, config.threads,
                 [&](std::size_t i) { results[i] = run_realization(config, hierarchy, todo[lo + i]); });
    for (std::size_t i = 0; i < results.size(); ++i) {
      out.redraws += results[i].redraws;
      if (!results[i].swap_acceptance.empty()) {
        swap_sum.resize(results[i].swap_acceptance.size(), 0.0);
        for (std::size_t k = 0; k < swap_sum.size(); ++k) {
          swap_sum[k] += results[i].swap_acceptance[k];
        }
        ++swap_count;
      }
      if (append) {
        for (const auto& m : results[i].rows) {
          write_moment_row(append, m);
        }
        append.flush();
      }
      per[static_cast<std::size_t>(todo[lo + i])] = std::move(results[i].rows);
    }
  }
  for (double& s : swap_sum) {
    s /= static_cast<double>(std::max<std::size_t>(1, swap_count));
  }
  out.swap_acceptance = swap_sum;

  for (const auto& rows : per) {
    out.moments.insert(out.moments.end(), rows.begin(), rows.end());
  }
  for (double t : config.temperatures) {
    BinderRow row;
    row.temperature = t;
    std::vector<ThermalMoments> chainless;
    std::vector<ThermalMoments> pt;
    for (const auto& m : out.moments) {
      if (std::abs(m.temperature - t) > 1e-9) {
        continue;
      }
      (m.method == "pt" ? pt : chainless).push_back(m.moments);
    }
    row.chainless = binder_ratio(chainless);
    if (pt.size() >= 2) {
      row.tempering = binder_ratio(pt);
    }
    out.rows.push_back(row);
  }
  return out;
}

void write_binder(std::ostream& os, const RunConfig& config, const EaBinderResult& r) {
  write_header(os, config, Command::kEaBinder);
  os << "# redraws=" << r.redraws << " resumed=" << r.resumed << '\n';
  std::size_t jett = 0;
  std::size_t sites = 0;
  for (const auto& m : r.moments) {
    jett += m.jettisoned;
    sites += m.sites;
  }
  os << "# jettisoned=" << jett << "/" << sites << '\n';
  if (!r.swap_acceptance.empty()) {
    os << "# pt_swap_acceptance=";
    for (std::size_t k = 0; k < r.swap_acceptance.size(); ++k) {
      os << (k ? ";" : "") << r.swap_acceptance[k];
    }
    os << '\n';
  }
  os << std::setprecision(10);
  os << "side,temperature,method,g,err,realizations\n";
  for (const auto& row : r.rows) {
    os << config.side << ',' << row.temperature << ",chainless," << row.chainless.g << ',' << row.chainless.error << ','
       << row.chainless.realizations << '\n';
    if (row.tempering) {
      os << config.side << ',' << row.temperature << ",pt," << row.tempering->g << ',' << row.tempering->error << ','
         << row.tempering->realizations << '\n';
    }
  }
}

// ---------------------------------------------------------------------------
// Coefficient flow, EA

EaFlowResult ea_flow(const RunConfig& config) {
  validate(config, Command::kEaFlow);
  const auto hierarchy = build_hierarchy(3, config.side, config.base_limit);
  const auto levels = similar_levels(3, config.side);
  EaFlowResult out;
  std::vector<Trend> trends;
  const auto r_count = static_cast<std::size_t>(config.realizations);
  for (std::size_t k = 0; k < config.temperatures.size(); ++k) {
    const double t = config.temperatures[k];
    std::vector<std::vector<double>> stats(r_count);
    parallel_for(r_count, config.threads, [&](std::size_t r) {
      const auto dseed = derive_seed(config.seed, StreamDomain::kRealization, r);
      const auto couplings = draw_disorder(dseed, hierarchy.lattice(), 1.0 / t);
      const auto run = evaluate(config, hierarchy, couplings, derive_seed(dseed, StreamDomain::kDiagnostic, k),
                                config.flow_samples, 1);
      std::vector<SpinConfiguration> spins;
      std::vector<double> weights;
      for (const auto& s : run.samples) {
        spins.push_back(s.spins);
        weights.push_back(std::exp(std::min(s.log_weight, config.flow_log_cap)));
      }
      const auto flow =
          flow_diagnostic(hierarchy.lattice(), levels, spins, couplings, FlowStatistic::kSumAbs, weights, 1);
      for (const auto& lv : flow.levels) {
        stats[r].push_back(lv.statistic);
      }
    });
    EaFlowRow row;
    row.temperature = t;
    row.levels = levels;
    for (std::size_t l = 0; l < levels.size(); ++l) {
      double m = 0.0;
      for (const auto& s : stats) {
        m += s[l];
      }
      m /= static_cast<double>(r_count);
      double v = 0.0;
      for (const auto& s : stats) {
        v += (s[l] - m) * (s[l] - m);
      }
      v /= static_cast<double>(r_count - 1);
      row.mean.push_back(m);
      row.error.push_back(std::sqrt(v / static_cast<double>(r_count)));
    }
    row.trend = classify_trend(row.mean);
    trends.push_back(row.trend);
    out.rows.push_back(std::move(row));
  }
  out.bracket = flow_bracket(config.temperatures, trends);
  return out;
}

void write_ea_flow(std::ostream& os, const RunConfig& config, const EaFlowResult& r) {
  write_header(os, config, Command::kEaFlow);
  os << "# statistic=sum over terms of site-averaged |coefficient|, averaged over realizations\n";
  os << "# bifurcation=" << (r.bracket.bifurcation ? "yes" : "no") << '\n';
  os << std::setprecision(10);
  os << "temperature,level,statistic,err,realizations,trend\n";
  for (const auto& row : r.rows) {
    for (std::size_t l = 0; l < row.levels.size(); ++l) {
      os << row.temperature << ',' << row.levels[l] << ',' << row.mean[l] << ',' << row.error[l] << ','
         << config.realizations << ',' << to_string(row.trend) << '\n';
    }
  }
}

// ---------------------------------------------------------------------------
// Validation suites

std::vector<Check> validation_suite(const RunConfig& config) {
  std::vector<Check> checks;
  auto add = [&](std::string name, bool pass, std::string detail) {
    checks.push_back({std::move(name), pass, std::move(detail)});
  };
  auto guarded = [&](const std::string& name, const std::function<void()>& body) {
    try {
      body();
    } catch (const std::exception& e) {
      add(name, false, std::string{"exception: "} + e.what());
    }
  };
  auto num = [](double v) {
    std::ostringstream os;
    os << std::setprecision(6) << v;
    return os.str();
  };

  guarded("hierarchy", [&] {
    std::string bad;
    for (auto [dim, side] : {std::pair{2, 4}, {2, 8}, {2, 16}, {2, 32}, {3, 4}, {3, 8}}) {
      const auto h = build_hierarchy(dim, side);
      for (int i = 0; i < h.base_level(); ++i) {
        if (h.level(i).sites.size() != 2 * h.level(i + 1).sites.size()) {
          bad += " halving(" + std::to_string(dim) + "D N=" + std::to_string(side) + ")";
        }
      }
      std::vector<int> seen(static_cast<std::size_t>(h.lattice().size()), 0);
      for (int i = 0; i < h.base_level(); ++i) {
        for (SiteId s : h.level(i).sampled) {
          ++seen[static_cast<std::size_t>(s)];
        }
      }
      for (SiteId s : h.base().sites) {
        ++seen[static_cast<std::size_t>(s)];
      }
      if (std::any_of(seen.begin(), seen.end(), [](int c) { return c != 1; })) {
        bad += " partition(" + std::to_string(dim) + "D N=" + std::to_string(side) + ")";
      }
    }
    add("hierarchy", bad.empty(), bad.empty() ? "levels halve and partition the lattice" : bad);
  });

  const auto h4 = build_hierarchy_2d(4, 4);
  const auto c4 = CouplingField::uniform(h4.lattice(), 1.0 / 2.2);
  const EnumerationOracle oracle{c4};

  guarded("eq3-identity", [&] {
    double worst = 0.0;
    for (int lv = 1; lv <= h4.base_level(); ++lv) {
      const auto& sites = h4.level(lv).sites;
      for (std::uint32_t st = 0; st < (1U << sites.size()); ++st) {
        for (SiteId u : sites) {
          worst = std::max(worst, std::abs(exact_conditional_derivative(oracle, h4, lv, u, st) -
                                           marginal_derivative_complex_step(oracle, h4, lv, u, st)));
        }
      }
    }
    add("eq3-identity", worst <= 1e-10, "max deviation " + num(worst));
  });

  guarded("zero-variance", [&] {
    const auto sampler = exact_sampler(oracle, h4);
    auto samples = draw_samples(sampler, config.seed, StreamDomain::kTest, 0, 0, 2000, config.threads);
    center_log_weights(samples);
    double worst = 0.0;
    for (const auto& s : samples) {
      worst = std::max(worst, std::abs(s.log_weight));
    }
    double total = 0.0;
    oracle.for_each([&](std::uint32_t st, std::span<const std::int8_t>, double) {
      total += std::exp(sampler.log_probability(oracle.configuration(st)));
    });
    add("zero-variance", worst <= 1e-10 && std::abs(total - 1.0) <= 1e-8,
        "max |centered log w| " + num(worst) + ", sum P0 - 1 = " + num(total - 1.0));
  });

  guarded("unbiased-4x4", [&] {
    const double exact = exact_expectation(oracle, [](auto s) { return std::abs(magnetization(s)); });
    RunConfig c = config;
    c.restrict_nonneg = false;
    const auto run = evaluate(c, h4, c4, config.seed, 10000, config.threads);
    std::vector<double> lw;
    std::vector<double> v;
    for (const auto& s : run.samples) {
      lw.push_back(s.log_weight);
      v.push_back(std::abs(magnetization(s.spins)));
    }
    const auto est = capped_weighted_mean(lw, v, kNoCap);
    const double z = std::abs(est.mean - exact) / est.error;
    add("unbiased-4x4", z <= 3.0,
        "estimate " + num(est.mean) + " +- " + num(est.error) + " vs exact " + num(exact) + " (" + num(z) + " SE)");
  });

  guarded("beta-zero", [&] {
    const auto h = build_hierarchy_2d(16);
    const auto c0 = CouplingField::uniform(h.lattice(), 0.0);
    const auto bases = sampling_bases(h);
    BootstrapConfig bc;
    bc.seed = config.seed;
    bc.threads = config.threads;
    bc.iterations = 1;
    const double tol = 5.0 / std::sqrt(bc.samples);
    // With averaging one round maps a0 to a0/2; without it the fresh estimate is zero.
    const auto halved = run_bootstrap(bc, h, bases, c0);
    bc.averaging = false;
    const auto fresh = run_bootstrap(bc, h, bases, c0);
    double dev_half = 0.0;
    double dev_zero = 0.0;
    for (std::size_t k = 0; k < halved.table.num_blocks(); ++k) {
      for (double a : halved.table.block(k).values) {
        dev_half = std::max(dev_half, std::abs(a - 0.5 * bc.initial));
      }
      for (double a : fresh.table.block(k).values) {
        dev_zero = std::max(dev_zero, std::abs(a));
      }
    }
    const ChainlessSampler uniform{h, c0, CoefficientTable{bases, 0.0}, false};
    const double expected = -h.lattice().size() * std::numbers::ln2;
    double lp_dev = 0.0;
    for (const auto& s : draw_samples(uniform, config.seed, StreamDomain::kTest, 1, 0, 200, config.threads)) {
      lp_dev = std::max(lp_dev, std::abs(s.log_p0 - expected));
    }
    const ChainlessSampler fitted{h, c0, fresh.table, false};
    auto samples = draw_samples(fitted, config.seed, StreamDomain::kTest, 2, 0, 2000, config.threads);
    center_log_weights(samples);
    std::vector<double> lw;
    std::vector<double> mu;
    for (const auto& s : samples) {
      lw.push_back(s.log_weight);
      mu.push_back(magnetization(s.spins));
    }
    const auto est = capped_weighted_mean(lw, mu, kNoCap);
    const bool pass = dev_half <= tol && dev_zero <= tol && lp_dev <= 1e-9 && std::abs(est.mean) <= 3.0 * est.error;
    add("beta-zero", pass,
        "max |a - a0/2| " + num(dev_half) + ", max |a| " + num(dev_zero) + " (tol " + num(tol) +
            "), log P0 deviation " + num(lp_dev) + ", E[mu] " + num(est.mean) + " +- " + num(est.error));
  });

  if (!config.coefficients.empty()) {
    guarded("coefficient-file", [&] {
      const auto h = build_hierarchy(config.dim, config.side, config.base_limit);
      std::ifstream in{config.coefficients};
      if (!in) {
        throw std::runtime_error("cannot open " + config.coefficients);
      }
      const auto bases = sampling_bases(h);
      const auto table = read_coefficients(in, h.lattice(), bases);
      add("coefficient-file", true, std::to_string(table.site_count()) + " sites loaded");
    });
  }
  return checks;
}

void write_checks(std::ostream& os, std::span<const Check> checks) {
  for (const auto& c : checks) {
    os << (c.pass ? "PASS " : "FAIL ") << c.name << ": " << c.detail << '\n';
  }
}

}  // namespace chainless::tools
