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

// Command-line harness for the chainless experiments.
//
// Exit codes: 0 success, 1 configuration error, 2 validation failure, 3 runtime failure.

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "chainless/lattice.hpp"
#include "config.hpp"
#include "experiments.hpp"

namespace {

using chainless::tools::Command;
using chainless::tools::ConfigError;
using chainless::tools::RunConfig;

constexpr int kExitConfig = 1;
constexpr int kExitValidation = 2;
constexpr int kExitRuntime = 3;

bool command_is_validation(Command c) { return c == Command::kValidate; }

struct Options {
  std::string config_file;
  std::vector<std::string> assignments;
  std::string side;
  std::string temperature;
  std::string samples;
  std::string seed;
  std::string threads;
  std::string output;
  std::string realizations;
};

void add_common(CLI::App* sub, Options& o) {
  sub->add_option("-c,--config", o.config_file, "config file with key = value lines");
  sub->add_option("-s,--set", o.assignments, "override a config key (key=value), repeatable");
  sub->add_option("--side", o.side, "lattice side N");
  sub->add_option("-T,--temperature", o.temperature, "temperature or comma-separated grid");
  sub->add_option("--samples", o.samples, "evaluation samples");
  sub->add_option("--seed", o.seed, "master seed (default: CHAINLESS_SEED or 1)");
  sub->add_option("-j,--threads", o.threads, "worker threads");
  sub->add_option("-o,--output", o.output, "output directory");
  sub->add_option("--realizations", o.realizations, "disorder realizations");
}

RunConfig build_config(const Options& o, Command command) {
  // Command defaults first, so a config file can override them.
  RunConfig c = command_defaults(command);
  if (!o.config_file.empty()) {
    std::ifstream in{o.config_file};
    if (!in) {
      throw ConfigError("cannot open config file " + o.config_file);
    }
    apply_file(c, in);
  }
  if (const char* env = std::getenv("CHAINLESS_SEED"); env != nullptr && o.seed.empty()) {
    apply(c, "seed", env);
  }
  const std::pair<const std::string*, const char*> flags[] = {
      {&o.side, "side"},   {&o.temperature, "temperature"}, {&o.samples, "samples"},
      {&o.seed, "seed"},   {&o.threads, "threads"},         {&o.output, "output"},
      {&o.realizations, "realizations"},
  };
  for (const auto& [value, key] : flags) {
    if (!value->empty()) {
      apply(c, key, *value);
    }
  }
  for (const auto& a : o.assignments) {
    const auto eq = a.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("--set expects key=value, got '" + a + "'");
    }
    apply(c, a.substr(0, eq), a.substr(eq + 1));
  }
  validate(c, command);
  return c;
}

std::ofstream open_output(const RunConfig& c, const std::string& name) {
  std::filesystem::create_directories(c.output);
  const auto path = std::filesystem::path{c.output} / name;
  std::ofstream os{path};
  if (!os) {
    throw ConfigError("cannot write " + path.string());
  }
  std::cout << "writing " << path.string() << '\n';
  return os;
}

int run(Command command, const Options& o) {
  const RunConfig c = build_config(o, command);
  const auto t0 = std::chrono::steady_clock::now();
  int status = 0;
  switch (command) {
    case Command::kIsingMag: {
      const auto r = chainless::tools::ising_magnetization(c);
      auto os = open_output(c, "ising_mag.csv");
      write_magnetization(os, c, r);
      for (const auto& row : r.mu.rows) {
        std::cout << "logW=" << row.log_cap << " f=" << row.fraction << " E[mu]=" << row.mean << " +- " << row.error
                  << '\n';
      }
      std::cout << (r.mu.converged ? "converged" : "no convergence") << '\n';
      break;
    }
    case Command::kIsingFlow: {
      const auto r = chainless::tools::ising_flow(c);
      auto os = open_output(c, "ising_flow.csv");
      write_flow(os, c, r);
      for (std::size_t k = 0; k < r.flows.size(); ++k) {
        std::cout << "T=" << r.temperatures[k];
        for (const auto& lv : r.flows[k].levels) {
          std::cout << " i=" << lv.level << ":" << lv.statistic;
        }
        std::cout << ' ' << to_string(r.flows[k].trend) << '\n';
      }
      if (r.bracket.bifurcation) {
        std::cout << "bracket " << r.bracket.lower << " < Tc < " << r.bracket.upper << ", midpoint "
                  << r.bracket.midpoint() << '\n';
      } else {
        std::cout << "no bracket\n";
      }
      break;
    }
    case Command::kWeightsHist: {
      const auto h = chainless::tools::weight_histogram(c);
      auto os = open_output(c, "weights_hist.csv");
      write_histogram(os, c, h);
      std::cout << "mean log w " << h.mean << ", std " << h.stddev << '\n';
      break;
    }
    case Command::kEaBinder: {
      std::filesystem::create_directories(c.output);
      const auto moments = (std::filesystem::path{c.output} / "ea_binder_moments.csv").string();
      const auto r = chainless::tools::ea_binder(c, moments);
      auto os = open_output(c, "ea_binder.csv");
      write_binder(os, c, r);
      for (const auto& row : r.rows) {
        std::cout << "T=" << row.temperature << " g=" << row.chainless.g << " +- " << row.chainless.error;
        if (row.tempering) {
          std::cout << " (pt " << row.tempering->g << " +- " << row.tempering->error << ")";
        }
        std::cout << '\n';
      }
      std::cout << "redraws " << r.redraws << ", resumed " << r.resumed << '\n';
      break;
    }
    case Command::kEaFlow: {
      const auto r = chainless::tools::ea_flow(c);
      auto os = open_output(c, "ea_flow.csv");
      write_ea_flow(os, c, r);
      for (const auto& row : r.rows) {
        std::cout << "T=" << row.temperature;
        for (std::size_t l = 0; l < row.levels.size(); ++l) {
          std::cout << " i=" << row.levels[l] << ":" << row.mean[l] << "+-" << row.error[l];
        }
        std::cout << ' ' << to_string(row.trend) << '\n';
      }
      std::cout << "bifurcation: " << (r.bracket.bifurcation ? "yes" : "no") << '\n';
      break;
    }
    case Command::kLatticeDump: {
      const auto h = chainless::build_hierarchy(c.dim, c.side, c.base_limit);
      auto os = open_output(c, "lattice_" + std::to_string(c.dim) + "d_" + std::to_string(c.side) + ".csv");
      write_classification_csv(os, h);
      for (int i = 0; i <= h.base_level(); ++i) {
        const auto& lv = h.level(i);
        std::cout << "level " << i << ": " << lv.sites.size() << " sites, spacing " << lv.spacing << ", "
                  << to_string(lv.shape) << '\n';
      }
      break;
    }
    case Command::kValidate: {
      const auto checks = chainless::tools::validation_suite(c);
      write_checks(std::cout, checks);
      for (const auto& ch : checks) {
        if (!ch.pass) {
          status = kExitValidation;
        }
      }
      break;
    }
  }
  std::cout << "wall time " << std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count()
            << " s\n";
  return status;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"chainless: independent-sample Monte Carlo for lattice spin systems"};
  app.require_subcommand(1);
  const std::pair<Command, const char*> commands[] = {
      {Command::kIsingMag, "2D Ising magnetization with a cap sweep"},
      {Command::kIsingFlow, "2D Ising coefficient flow over a temperature grid"},
      {Command::kEaBinder, "3D Edwards-Anderson Binder ratio over disorder realizations"},
      {Command::kEaFlow, "3D Edwards-Anderson coefficient flow"},
      {Command::kWeightsHist, "histogram of centered log-weights"},
      {Command::kLatticeDump, "write the level of every site"},
      {Command::kValidate, "run the oracle suites"},
  };
  std::string key_help = "Config keys (for -c files and --set):\n";
  for (const auto& [key, doc] : chainless::tools::keys()) {
    key_help += "  " + key + std::string(key.size() < 22 ? 22 - key.size() : 1, ' ') + doc + '\n';
  }
  std::vector<Options> options(std::size(commands));
  std::vector<CLI::App*> subs;
  for (std::size_t k = 0; k < std::size(commands); ++k) {
    subs.push_back(app.add_subcommand(to_string(commands[k].first), commands[k].second));
    add_common(subs.back(), options[k]);
    subs.back()->footer(key_help);
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }
  for (std::size_t k = 0; k < subs.size(); ++k) {
    if (!subs[k]->parsed()) {
      continue;
    }
    try {
      return run(commands[k].first, options[k]);
    } catch (const ConfigError& e) {
      std::cerr << "config error: " << e.what() << '\n';
      return kExitConfig;
    } catch (const std::runtime_error& e) {
      // Corrupted inputs (coefficient tables, disorder files) surface here.
      std::cerr << "error: " << e.what() << '\n';
      return command_is_validation(commands[k].first) ? kExitValidation : kExitRuntime;
    } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << '\n';
      return kExitRuntime;
    }
  }
  return kExitConfig;
}
