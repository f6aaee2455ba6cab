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

#include "config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

#include "chainless/lattice.hpp"

#ifndef CHAINLESS_VERSION
#define CHAINLESS_VERSION "unknown"
#endif

namespace chainless::tools {

std::string to_string(Command c) {
  switch (c) {
    case Command::kIsingMag:
      return "ising-mag";
    case Command::kIsingFlow:
      return "ising-flow";
    case Command::kEaBinder:
      return "ea-binder";
    case Command::kEaFlow:
      return "ea-flow";
    case Command::kWeightsHist:
      return "weights-hist";
    case Command::kLatticeDump:
      return "lattice-dump";
    case Command::kValidate:
      return "validate";
  }
  return "unknown";
}

const std::vector<std::pair<std::string, std::string>>& keys() {
  static const std::vector<std::pair<std::string, std::string>> k{
      {"model", "ising | ea"},
      {"dim", "lattice dimension, 2 or 3"},
      {"side", "lattice side N (power of two >= 4)"},
      {"temperature", "comma-separated temperature list (one value for single-T commands)"},
      {"samples", "evaluation samples per temperature (and per realization for ea-binder)"},
      {"bootstrap.initial", "starting value of every coefficient"},
      {"bootstrap.iterations", "bootstrap rounds R"},
      {"bootstrap.samples", "samples per bootstrap round"},
      {"bootstrap.averaging", "average old and new coefficients (true | false)"},
      {"caps", "comma-separated, strictly increasing log W cap grid"},
      {"restrict", "restrict the base level to non-negative spin sums (true | false)"},
      {"seed", "master seed (also CHAINLESS_SEED)"},
      {"realizations", "disorder realizations for ea-binder and ea-flow"},
      {"threads", "worker threads"},
      {"output", "output directory"},
      {"base_limit", "largest enumerated base level"},
      {"metropolis.sweeps", "Metropolis reference sweeps for ising-mag (0 = off)"},
      {"bins", "histogram bins for weights-hist"},
      {"flow.samples", "samples per temperature for the coefficient flow"},
      {"flow.log_cap", "log W cap on the importance weights of the flow projection"},
      {"binder.log_cap", "log W cap on replica-pair weights"},
      {"pt.sweeps", "parallel-tempering sweeps per realization for ea-binder (0 = off)"},
      {"pt.burn_in", "parallel-tempering burn-in sweeps"},
      {"pt.ladder", "geometric ladder size over [0.5, 2.5], merged with the target temperatures"},
      {"max_redraws", "redraws of a failed realization before giving up"},
      {"coefficients", "coefficient table to load and check (validate)"},
  };
  return k;
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) {
    return {};
  }
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

template <typename T>
T parse_number(const std::string& key, const std::string& text) {
  T value{};
  const std::string t = trim(text);
  const auto* first = t.data();
  const auto* last = t.data() + t.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc{} || ptr != last) {
    throw ConfigError("config key '" + key + "': cannot parse '" + text + "'");
  }
  return value;
}

double parse_double(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(t, &used);
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "': cannot parse '" + text + "'");
  }
  if (used != t.size() || !std::isfinite(v)) {
    throw ConfigError("config key '" + key + "': cannot parse '" + text + "'");
  }
  return v;
}

std::vector<double> parse_list(const std::string& key, const std::string& text) {
  std::vector<double> out;
  std::stringstream ss{text};
  std::string item;
  while (std::getline(ss, item, ',')) {
    out.push_back(parse_double(key, item));
  }
  if (out.empty()) {
    throw ConfigError("config key '" + key + "': empty list");
  }
  return out;
}

bool parse_bool(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  if (t == "true" || t == "1" || t == "yes" || t == "on") {
    return true;
  }
  if (t == "false" || t == "0" || t == "no" || t == "off") {
    return false;
  }
  throw ConfigError("config key '" + key + "': expected true or false, got '" + text + "'");
}

}  // namespace

void apply(RunConfig& c, const std::string& raw_key, const std::string& raw_value) {
  const std::string key = trim(raw_key);
  const std::string value = trim(raw_value);
  if (key == "model") {
    try {
      c.model = parse_model_kind(value);
    } catch (const std::exception& e) {
      throw ConfigError(e.what());
    }
  } else if (key == "dim") {
    c.dim = parse_number<int>(key, value);
  } else if (key == "side") {
    c.side = parse_number<int>(key, value);
  } else if (key == "temperature" || key == "temperatures") {
    c.temperatures = parse_list(key, value);
  } else if (key == "samples") {
    c.samples = parse_number<int>(key, value);
  } else if (key == "bootstrap.initial") {
    c.initial = parse_double(key, value);
  } else if (key == "bootstrap.iterations") {
    c.iterations = parse_number<int>(key, value);
  } else if (key == "bootstrap.samples") {
    c.bootstrap_samples = parse_number<int>(key, value);
  } else if (key == "bootstrap.averaging") {
    c.averaging = parse_bool(key, value);
  } else if (key == "caps") {
    c.caps = parse_list(key, value);
  } else if (key == "restrict") {
    c.restrict_nonneg = parse_bool(key, value);
  } else if (key == "seed") {
    c.seed = parse_number<std::uint64_t>(key, value);
  } else if (key == "realizations") {
    c.realizations = parse_number<int>(key, value);
  } else if (key == "threads") {
    c.threads = parse_number<int>(key, value);
  } else if (key == "output") {
    c.output = value;
  } else if (key == "base_limit") {
    c.base_limit = parse_number<int>(key, value);
  } else if (key == "metropolis.sweeps") {
    c.metropolis_sweeps = parse_number<std::size_t>(key, value);
  } else if (key == "bins") {
    c.bins = parse_number<int>(key, value);
  } else if (key == "flow.samples") {
    c.flow_samples = parse_number<int>(key, value);
  } else if (key == "flow.log_cap") {
    c.flow_log_cap = parse_double(key, value);
  } else if (key == "binder.log_cap") {
    c.binder_log_cap = parse_double(key, value);
  } else if (key == "pt.sweeps") {
    c.pt_sweeps = parse_number<std::size_t>(key, value);
  } else if (key == "pt.burn_in") {
    c.pt_burn_in = parse_number<std::size_t>(key, value);
  } else if (key == "pt.ladder") {
    c.pt_ladder = parse_number<int>(key, value);
  } else if (key == "max_redraws") {
    c.max_redraws = parse_number<int>(key, value);
  } else if (key == "coefficients") {
    c.coefficients = value;
  } else {
    throw ConfigError("unknown config key '" + key + "'");
  }
  c.echo.emplace_back(key, value);
}

void apply_file(RunConfig& config, std::istream& is) {
  std::string line;
  int number = 0;
  while (std::getline(is, line)) {
    ++number;
    if (const auto hash = line.find('#'); hash != std::string::npos) {
      line.erase(hash);
    }
    if (trim(line).empty()) {
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(number) + ": expected 'key = value'");
    }
    apply(config, line.substr(0, eq), line.substr(eq + 1));
  }
}

RunConfig command_defaults(Command command) {
  RunConfig c;
  switch (command) {
    case Command::kIsingFlow:
      apply(c, "temperature", "2.20,2.25,2.26,2.28,2.30,2.32,2.33,2.35");
      break;
    case Command::kEaBinder:
      apply(c, "model", "ea");
      apply(c, "dim", "3");
      apply(c, "side", "4");
      apply(c, "temperature", "0.9,1.5,2.0,2.5");
      apply(c, "samples", "5000");
      apply(c, "caps", "30");
      // Couplings have zero mean; a uniform ferromagnetic start orders the base level completely.
      apply(c, "bootstrap.initial", "0");
      break;
    case Command::kEaFlow:
      apply(c, "model", "ea");
      apply(c, "dim", "3");
      apply(c, "side", "8");
      apply(c, "temperature", "0.6,1.0,2.0");
      apply(c, "realizations", "10");
      apply(c, "bootstrap.initial", "0");
      break;
    case Command::kWeightsHist:
      apply(c, "side", "32");
      apply(c, "samples", "10000");
      break;
    default:
      break;
  }
  return c;
}

void validate(const RunConfig& c, Command command) {
  auto fail = [](const std::string& msg) { throw ConfigError(msg); };
  if (c.dim != 2 && c.dim != 3) {
    fail("dim must be 2 or 3");
  }
  if (c.side < 4 || (c.side & (c.side - 1)) != 0) {
    fail("side must be a power of two >= 4");
  }
  if (c.base_limit < 2) {
    fail("base_limit must be at least 2");
  }
  if (c.threads < 1) {
    fail("threads must be >= 1");
  }
  if (command == Command::kLatticeDump) {
    return;
  }
  for (double t : c.temperatures) {
    if (!(t > 0.0)) {
      fail("temperatures must be positive");
    }
  }
  if (c.samples < 2 || c.bootstrap_samples < 1 || c.iterations < 1) {
    fail("samples, bootstrap.samples and bootstrap.iterations must be positive (samples >= 2)");
  }
  for (std::size_t k = 1; k < c.caps.size(); ++k) {
    if (!(c.caps[k] > c.caps[k - 1])) {
      fail("caps must be strictly increasing");
    }
  }
  const bool ising = command == Command::kIsingMag || command == Command::kIsingFlow;
  const bool ea = command == Command::kEaBinder || command == Command::kEaFlow;
  if (ising && (c.model != ModelKind::kIsing || c.dim != 2)) {
    fail(to_string(command) + " needs model = ising and dim = 2");
  }
  if (ea && (c.model != ModelKind::kEdwardsAnderson || c.dim != 3)) {
    fail(to_string(command) + " needs model = ea and dim = 3");
  }
  if ((command == Command::kIsingMag || command == Command::kWeightsHist) && c.temperatures.size() != 1) {
    fail(to_string(command) + " takes a single temperature");
  }
  if (command == Command::kIsingFlow && c.side < 16) {
    fail("ising-flow needs side >= 16");
  }
  if (ea && c.realizations < 2) {
    fail("EA commands need at least two realizations");
  }
  if (command == Command::kWeightsHist && c.bins < 1) {
    fail("bins must be positive");
  }
  if ((command == Command::kIsingFlow || command == Command::kEaFlow) && c.flow_samples < 2) {
    fail("flow.samples must be at least 2");
  }
  if (c.pt_ladder < 2 || c.max_redraws < 0) {
    fail("pt.ladder must be >= 2 and max_redraws >= 0");
  }
  // Hierarchy shape checks (base size, stencils) are cheap; run them now rather than mid-compute.
  try {
    if (build_hierarchy(c.dim, c.side, c.base_limit).base_level() < 1) {
      fail("lattice: the whole lattice fits in the base level; lower base_limit");
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    fail(std::string{"lattice: "} + e.what());
  }
}

void write_header(std::ostream& os, const RunConfig& config, Command command) {
  os << "# chainless " << CHAINLESS_VERSION << " command=" << to_string(command) << '\n';
  os << "# seed=" << config.seed << '\n';
  for (const auto& [k, v] : config.echo) {
    os << "# config " << k << " = " << v << '\n';
  }
}

}  // namespace chainless::tools
