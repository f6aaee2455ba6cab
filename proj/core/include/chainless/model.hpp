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

#ifndef CHAINLESS_MODEL_HPP
#define CHAINLESS_MODEL_HPP

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "chainless/lattice.hpp"

namespace chainless {

enum class ModelKind { kIsing, kEdwardsAnderson };

[[nodiscard]] std::string to_string(ModelKind kind);
[[nodiscard]] ModelKind parse_model_kind(const std::string& text);

/// Temperature and model choice. `field` is the symmetry-breaking strength
/// epsilon_0; the added term is (epsilon_0 / N) * sum(s) and is used only by the
/// Metropolis reference.
struct ModelParams {
  ModelKind kind = ModelKind::kIsing;
  double temperature = 1.0;
  double field = 0.0;

  [[nodiscard]] double beta() const noexcept { return 1.0 / temperature; }
};

/// One value in {-1, +1} per lattice site.
class SpinConfiguration {
 public:
  SpinConfiguration() = default;
  explicit SpinConfiguration(SiteId size, std::int8_t value = 1) : values_(static_cast<std::size_t>(size), value) {}

  [[nodiscard]] SiteId size() const noexcept { return static_cast<SiteId>(values_.size()); }
  [[nodiscard]] std::int8_t operator[](SiteId s) const noexcept { return values_[static_cast<std::size_t>(s)]; }
  [[nodiscard]] std::int8_t& operator[](SiteId s) noexcept { return values_[static_cast<std::size_t>(s)]; }
  [[nodiscard]] std::span<const std::int8_t> values() const noexcept { return values_; }
  [[nodiscard]] std::span<std::int8_t> values() noexcept { return values_; }

  /// Global spin flip.
  [[nodiscard]] SpinConfiguration flipped() const;

  friend bool operator==(const SpinConfiguration&, const SpinConfiguration&) = default;

 private:
  std::vector<std::int8_t> values_;
};

/// Bond couplings with the inverse temperature absorbed.
///
/// Bond (site, axis) joins `site` and its forward neighbor along `axis`. The
/// stored value is beta * unit coupling, where the unit coupling is 1 for the
/// Ising model and a standard normal draw for the Edwards-Anderson model.
class CouplingField {
 public:
  CouplingField(Lattice lattice, double beta, std::vector<double> unit_bonds, double field = 0.0);

  /// Ising couplings beta * J0 on every bond.
  [[nodiscard]] static CouplingField uniform(const Lattice& lattice, double beta, double j0 = 1.0);

  [[nodiscard]] const Lattice& lattice() const noexcept { return lattice_; }
  [[nodiscard]] double beta() const noexcept { return beta_; }
  /// Beta-absorbed external field (0 in the chainless path).
  [[nodiscard]] double field() const noexcept { return field_; }
  [[nodiscard]] double bond(SiteId site, int axis) const noexcept {
    return bonds_[static_cast<std::size_t>(site) * lattice_.dim() + axis];
  }
  [[nodiscard]] double unit_bond(SiteId site, int axis) const noexcept {
    return unit_[static_cast<std::size_t>(site) * lattice_.dim() + axis];
  }
  /// Couplings of the 2*dim bonds incident on `site`, aligned with Lattice::neighbors.
  [[nodiscard]] std::span<const double> incident(SiteId site) const noexcept {
    const auto k = static_cast<std::size_t>(2 * lattice_.dim());
    return {incident_.data() + static_cast<std::size_t>(site) * k, k};
  }
  [[nodiscard]] std::span<const double> unit_bonds() const noexcept { return unit_; }

  /// Same unit couplings at another inverse temperature.
  [[nodiscard]] CouplingField with_beta(double beta) const;
  /// Same couplings with a beta-absorbed field term.
  [[nodiscard]] CouplingField with_field(double field) const;

  std::optional<std::uint64_t> seed;

 private:
  Lattice lattice_;
  double beta_;
  double field_;
  std::vector<double> unit_;
  std::vector<double> bonds_;
  std::vector<double> incident_;
};

/// Raised when a configuration and a coupling field disagree on the lattice.
class SizeMismatch : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// W0(S) = sum over bonds of J * s * s' (+ field * sum s).
[[nodiscard]] double log_density_unnormalized(const SpinConfiguration& spins, const CouplingField& couplings);

/// dW0/ds at `site`, with s treated as continuous: sum of coupling * neighbor spin (+ field).
[[nodiscard]] double site_derivative(const SpinConfiguration& spins, const CouplingField& couplings, SiteId site);

/// Unchecked variant for inner loops.
[[nodiscard]] inline double local_field(std::span<const std::int8_t> spins, const CouplingField& couplings,
                                        SiteId site) noexcept {
  const auto nbrs = couplings.lattice().neighbors(site);
  const auto j = couplings.incident(site);
  double h = couplings.field();
  for (std::size_t k = 0; k < nbrs.size(); ++k) {
    h += j[k] * spins[static_cast<std::size_t>(nbrs[k])];
  }
  return h;
}

/// Edwards-Anderson couplings beta * xi with xi i.i.d. standard normal, reproducible from `seed`.
[[nodiscard]] CouplingField draw_disorder(std::uint64_t seed, const Lattice& lattice, double beta);

/// Text format: '#'-prefixed header (seed, dim, side, temperature) then "x y [z] axis xi" per bond.
void write_disorder(std::ostream& os, const CouplingField& couplings);
[[nodiscard]] CouplingField read_disorder(std::istream& is);

}  // namespace chainless

#endif  // CHAINLESS_MODEL_HPP
