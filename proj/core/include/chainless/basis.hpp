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

#ifndef CHAINLESS_BASIS_HPP
#define CHAINLESS_BASIS_HPP

#include <cmath>
#include <complex>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "chainless/lattice.hpp"
#include "chainless/model.hpp"

/**
 * \file
 * \brief Linkage polynomials and their site derivatives.
 *
 * A pair term with offsets V describes the bonds (u, u+v), v in V. Each bond is
 * counted once from each endpoint, so its derivative at u is 2 * sum_v s(u+v).
 * An odd-power term is sum_x s_x sigma_x^p / norm, with sigma_x the sum of the
 * spins at x + v over its neighbor offsets; its derivative is the polynomial
 * derivative with s treated as continuous.
 */

namespace chainless {

enum class TermKind { kPair, kOddPower };
enum class BasisRole { kSampling, kDiagnostic };

struct LinkageTerm {
  TermKind kind = TermKind::kPair;
  /// Pair: partner offsets summed into one term. Odd-power: offsets defining sigma.
  std::vector<Coords> offsets;
  int power = 1;
  double normalizer = 1.0;
  std::string label;
};

[[nodiscard]] std::string describe(const LinkageTerm& term, int dim);

/// Evaluation plan of all terms of a basis at one site.
class SiteBasis {
 public:
  SiteBasis() = default;

  /// Pair term whose derivative is sum_k weights[k] * s(partners[k]).
  void add_pair(std::vector<SiteId> partners, std::vector<double> weights);
  /// Odd-power term; `sigma_sites` are the sigma neighbors of the site, `outer` the sites x whose sigma_x
  /// contains the site (with repetition), and `outer_sigma[j]` the sigma neighbors of outer[j].
  void add_odd_power(int power, double normalizer, std::vector<SiteId> sigma_sites, std::vector<SiteId> outer,
                     std::vector<std::vector<SiteId>> outer_sigma);

  [[nodiscard]] std::size_t size() const noexcept { return terms_.size(); }

  /// Writes the derivative of every term at the site into `out` (size() entries).
  template <class Spin>
  void derivatives(std::span<const Spin> spins, std::span<double> out) const;

 private:
  struct Term {
    TermKind kind;
    int power;
    double inv_norm;
    std::vector<SiteId> sites;
    std::vector<double> weights;
    std::vector<SiteId> outer;
    std::vector<std::vector<SiteId>> outer_sigma;
  };
  std::vector<Term> terms_;
};

/// A basis evaluated at a fixed set of sites of one level.
struct BasisSet {
  int level = 0;
  int spacing = 1;
  BasisRole role = BasisRole::kSampling;
  /// Nominal terms in positional order. For sampling bases the per-site terms are the distinct stencil
  /// partners, in stencil order, so a site may carry fewer terms than `terms` after periodic collapse.
  std::vector<LinkageTerm> terms;
  std::vector<SiteId> sites;
  std::vector<SiteBasis> site_terms;

  [[nodiscard]] std::size_t max_terms() const noexcept;
  [[nodiscard]] std::string describe(int dim) const;
};

/// Pair terms on the stencil of `level` (1 <= level <= n), evaluated at the level's stencil sites.
[[nodiscard]] BasisSet sampling_basis(const LevelHierarchy& hierarchy, int level);

/// The 7 diagnostic terms of a square level with spacing a: four diagonal pairs (+-a, +-a), the
/// axis pairs at 2a summed as one term, s*sigma^3/10 and s*sigma^5/100 with sigma over axis
/// neighbors at distance a.
[[nodiscard]] std::vector<LinkageTerm> diagnostic_terms_2d(int spacing);
/// The 20 diagnostic terms of a cubic level: 6 axis pairs at +-a, 12 face-diagonal pairs and
/// the two sigma powers over the 6 axis neighbors.
[[nodiscard]] std::vector<LinkageTerm> diagnostic_terms_3d(int spacing);

/// Diagnostic basis at every site of a square (2D) or cubic (3D) level; other shapes are rejected.
[[nodiscard]] BasisSet diagnostic_basis(const Lattice& lattice, int level);

/// Compiles `term` at `site`.
void compile_term(const LinkageTerm& term, const Lattice& lattice, SiteId site, SiteBasis& out);

/// Derivative of `term` at `site` (direct evaluation, no compilation).
[[nodiscard]] double derivative_at(const LinkageTerm& term, const Lattice& lattice, const SpinConfiguration& spins,
                                   SiteId site);

/// Lattice-sum value of `term` over `sites`: sum_x s_x sum_v s(x+v) for pairs, sum_x s_x sigma_x^p / norm
/// for odd powers. Templated on the spin type so tests can differentiate it with a complex step.
template <class Spin>
[[nodiscard]] Spin lattice_sum(const LinkageTerm& term, const Lattice& lattice, std::span<const Spin> spins,
                               std::span<const SiteId> sites) {
  Spin total{};
  for (SiteId x : sites) {
    Spin partner{};
    for (const auto& v : term.offsets) {
      partner += spins[static_cast<std::size_t>(lattice.shift(x, v))];
    }
    const Spin sx = spins[static_cast<std::size_t>(x)];
    if (term.kind == TermKind::kPair) {
      total += sx * partner;
    } else {
      Spin p = partner;
      for (int k = 1; k < term.power; ++k) {
        p *= partner;
      }
      total += sx * p / Spin(term.normalizer);
    }
  }
  return total;
}

template <class Spin>
void SiteBasis::derivatives(std::span<const Spin> spins, std::span<double> out) const {
  auto at = [&spins](SiteId s) { return static_cast<double>(spins[static_cast<std::size_t>(s)]); };
  for (std::size_t t = 0; t < terms_.size(); ++t) {
    const Term& term = terms_[t];
    double d = 0.0;
    if (term.kind == TermKind::kPair) {
      for (std::size_t k = 0; k < term.sites.size(); ++k) {
        d += term.weights[k] * at(term.sites[k]);
      }
    } else {
      double sigma = 0.0;
      for (SiteId s : term.sites) {
        sigma += at(s);
      }
      d = std::pow(sigma, term.power);
      for (std::size_t j = 0; j < term.outer.size(); ++j) {
        double sy = 0.0;
        for (SiteId s : term.outer_sigma[j]) {
          sy += at(s);
        }
        d += at(term.outer[j]) * term.power * std::pow(sy, term.power - 1);
      }
      d *= term.inv_norm;
    }
    out[t] = d;
  }
}

}  // namespace chainless

#endif  // CHAINLESS_BASIS_HPP
