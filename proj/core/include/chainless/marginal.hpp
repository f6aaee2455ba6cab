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

#ifndef CHAINLESS_MARGINAL_HPP
#define CHAINLESS_MARGINAL_HPP

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "chainless/basis.hpp"
#include "chainless/lattice.hpp"
#include "chainless/model.hpp"

/**
 * \file
 * \brief Approximate marginal Hamiltonians by projection.
 *
 * At every site u of level i the derivative of W0 is projected onto the span of
 * the basis derivatives phi_p(u): A_pq = E[phi_p phi_q], b_p = E[W0'(u) phi_p],
 * a = A^-1 b. The same full-lattice samples feed every level, and the target is
 * always W0', never a previously fitted level.
 */

namespace chainless {

/// Normal equations for every site of one basis.
class ProjectionSystem {
 public:
  explicit ProjectionSystem(const BasisSet& basis);

  /// Adds one full-lattice sample with the given weight.
  void add(std::span<const std::int8_t> spins, const CouplingField& couplings, const BasisSet& basis,
           double weight = 1.0);
  /// Adds the sums of another system over the same basis.
  void merge(const ProjectionSystem& other);

  [[nodiscard]] int level() const noexcept { return level_; }
  [[nodiscard]] std::size_t num_sites() const noexcept { return sizes_.size(); }
  [[nodiscard]] std::size_t terms(std::size_t slot) const noexcept { return sizes_[slot]; }
  [[nodiscard]] std::int64_t count() const noexcept { return count_; }
  [[nodiscard]] double total_weight() const noexcept { return total_weight_; }

  /// Averaged Gram matrix (row-major, terms x terms) and moment vector of a site.
  [[nodiscard]] std::vector<double> gram(std::size_t slot) const;
  [[nodiscard]] std::vector<double> moment(std::size_t slot) const;

 private:
  int level_;
  std::vector<std::size_t> sizes_;
  std::vector<std::size_t> offsets_;
  std::vector<double> sums_;
  std::int64_t count_ = 0;
  double total_weight_ = 0.0;
};

/// Per-level, per-site expansion coefficients, laid out like the bases they were fitted on.
class CoefficientTable {
 public:
  struct LevelBlock {
    int level = 0;
    std::vector<SiteId> sites;
    std::vector<std::size_t> offsets;  ///< sites.size() + 1 entries
    std::vector<double> values;
    std::vector<std::uint8_t> jettisoned;
  };

  CoefficientTable() = default;
  /// Table shaped like `bases`, every coefficient set to `value`.
  CoefficientTable(std::span<const BasisSet> bases, double value);

  [[nodiscard]] std::size_t num_blocks() const noexcept { return blocks_.size(); }
  [[nodiscard]] const LevelBlock& block(std::size_t k) const { return blocks_.at(k); }
  [[nodiscard]] LevelBlock& block(std::size_t k) { return blocks_.at(k); }
  /// Block for hierarchy level `level`; throws if absent.
  [[nodiscard]] const LevelBlock& level(int level) const;
  [[nodiscard]] LevelBlock& level(int level);

  [[nodiscard]] std::span<const double> at(int level, std::size_t slot) const;
  [[nodiscard]] std::span<double> at(int level, std::size_t slot);

  [[nodiscard]] std::size_t jettison_count() const noexcept;
  [[nodiscard]] std::size_t site_count() const noexcept;
  [[nodiscard]] bool same_shape(const CoefficientTable& other) const noexcept;

  /// Provenance written into the table header.
  std::string basis_description;
  std::int64_t sample_count = 0;
  std::uint64_t seed = 0;

  friend bool operator==(const CoefficientTable& a, const CoefficientTable& b);

 private:
  std::vector<LevelBlock> blocks_;
};

/// Sampling bases for levels 1..n of a hierarchy.
[[nodiscard]] std::vector<BasisSet> sampling_bases(const LevelHierarchy& hierarchy);

/// Accumulates projection systems for all bases from full-lattice samples. `weights` is empty for
/// plain averages. Samples are summed in fixed chunks so the result does not depend on `threads`.
[[nodiscard]] std::vector<ProjectionSystem> accumulate_projection(std::span<const SpinConfiguration> samples,
                                                                  std::span<const BasisSet> bases,
                                                                  const CouplingField& couplings,
                                                                  std::span<const double> weights = {},
                                                                  int threads = 1);

enum class SolveMethod {
  kJettison,      ///< zero out and flag sites whose Gram matrix is (near) singular
  kMinimumNorm,   ///< pseudo-inverse; identical basis columns share their coefficient
};

struct SolvePolicy {
  SolveMethod method = SolveMethod::kJettison;
  double rcond_threshold = 1e-10;
  double alarm_fraction = 0.05;
};

struct SolveReport {
  std::size_t sites = 0;
  std::size_t jettisoned = 0;
  double max_relative_residual = 0.0;
  std::vector<std::string> warnings;
};

/// Solves A a = b at every site of every system.
[[nodiscard]] CoefficientTable solve_coefficients(std::span<const ProjectionSystem> systems,
                                                  std::span<const BasisSet> bases, const SolvePolicy& policy = {},
                                                  SolveReport* report = nullptr);

struct SymmetrizeReport {
  std::size_t pairs = 0;
  /// Pearson correlation of the two endpoint estimates of each base-level bond (NaN if undefined).
  double endpoint_correlation = 0.0;
};

/// Replaces each base-level pair coefficient by the mean of its two endpoint estimates. Levels below
/// the base carry coefficients only at sampled sites and are left as they are. A jettisoned endpoint
/// defers to the other one.
[[nodiscard]] CoefficientTable symmetrize(const CoefficientTable& table, const LevelHierarchy& hierarchy,
                                          SymmetrizeReport* report = nullptr);

/// Text persistence: '#' header (basis description, sample count, seed) then
/// "level x y [z] term value jettisoned" per coefficient.
void write_coefficients(std::ostream& os, const CoefficientTable& table, const Lattice& lattice);
/// Reads a table and checks it against `bases`; throws std::runtime_error on any inconsistency.
[[nodiscard]] CoefficientTable read_coefficients(std::istream& is, const Lattice& lattice,
                                                 std::span<const BasisSet> bases);

}  // namespace chainless

#endif  // CHAINLESS_MARGINAL_HPP
