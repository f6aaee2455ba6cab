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

#ifndef CHAINLESS_TOOLS_CONFIG_HPP
#define CHAINLESS_TOOLS_CONFIG_HPP

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "chainless/model.hpp"

namespace chainless::tools {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Command { kIsingMag, kIsingFlow, kEaBinder, kEaFlow, kWeightsHist, kLatticeDump, kValidate };

[[nodiscard]] std::string to_string(Command c);

/// Flat run configuration. Every key in `keys()` can be set from a file or the command line.
struct RunConfig {
  ModelKind model = ModelKind::kIsing;
  int dim = 2;
  int side = 16;
  std::vector<double> temperatures{2.2};
  int samples = 1000;
  double initial = 0.3;
  int iterations = 2;
  int bootstrap_samples = 1000;
  bool averaging = true;
  std::vector<double> caps{2, 4, 6};
  bool restrict_nonneg = true;
  std::uint64_t seed = 1;
  int realizations = 100;
  int threads = 1;
  std::string output = "out";
  int base_limit = 16;
  std::size_t metropolis_sweeps = 0;
  int bins = 40;
  int flow_samples = 8000;
  double flow_log_cap = 30.0;
  double binder_log_cap = 30.0;
  std::size_t pt_sweeps = 0;
  std::size_t pt_burn_in = 2000;
  int pt_ladder = 12;
  int max_redraws = 3;
  std::string coefficients;

  /// Assignments in the order they were applied, echoed into every output header.
  std::vector<std::pair<std::string, std::string>> echo;
};

/// Documented keys with a one-line description each.
[[nodiscard]] const std::vector<std::pair<std::string, std::string>>& keys();

/// Defaults of a command: the grid, lattice and model each subcommand runs without further options.
[[nodiscard]] RunConfig command_defaults(Command command);

/// Sets one key from text; throws ConfigError for unknown keys or malformed values.
void apply(RunConfig& config, const std::string& key, const std::string& value);
/// Reads "key = value" lines; '#' starts a comment.
void apply_file(RunConfig& config, std::istream& is);
/// Checks everything a command needs before any compute; throws ConfigError.
void validate(const RunConfig& config, Command command);

/// '#'-prefixed header block: command, version, seed and the config echo.
void write_header(std::ostream& os, const RunConfig& config, Command command);

}  // namespace chainless::tools

#endif  // CHAINLESS_TOOLS_CONFIG_HPP
