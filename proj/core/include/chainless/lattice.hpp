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

#ifndef CHAINLESS_LATTICE_HPP
#define CHAINLESS_LATTICE_HPP

#include <array>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

/**
 * \file
 * \brief Periodic hypercubic lattices and the nested decimation hierarchy.
 *
 * Coordinates are 0-based. With this origin the retained sets of every
 * decimation cycle contain the origin, and each cycle ends on a lattice
 * similar to the starting one with twice the spacing.
 */

namespace chainless {

/// Raised for lattice sizes or levels the hierarchy cannot represent.
class GeometryError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

using SiteId = std::int32_t;
using Coords = std::array<int, 3>;

/// Periodic square (dim 2) or cubic (dim 3) lattice of side N.
class Lattice {
 public:
  Lattice(int dim, int side);

  [[nodiscard]] int dim() const noexcept { return dim_; }
  [[nodiscard]] int side() const noexcept { return side_; }
  [[nodiscard]] SiteId size() const noexcept { return size_; }

  /// Linear index of a site; coordinates are reduced mod N first.
  [[nodiscard]] SiteId index(const Coords& c) const noexcept;
  [[nodiscard]] Coords coords(SiteId site) const noexcept;
  [[nodiscard]] SiteId shift(SiteId site, const Coords& offset) const noexcept;

  /// The 2*dim nearest neighbors in the order +x, -x, +y, -y(, +z, -z).
  [[nodiscard]] std::span<const SiteId> neighbors(SiteId site) const noexcept {
    return {neighbors_.data() + static_cast<std::size_t>(site) * 2 * dim_,
            static_cast<std::size_t>(2 * dim_)};
  }
  /// Neighbor in the positive direction of `axis`.
  [[nodiscard]] SiteId forward(SiteId site, int axis) const noexcept {
    return neighbors_[static_cast<std::size_t>(site) * 2 * dim_ + 2 * axis];
  }

  friend bool operator==(const Lattice& a, const Lattice& b) noexcept {
    return a.dim_ == b.dim_ && a.side_ == b.side_;
  }

 private:
  int dim_;
  int side_;
  SiteId size_;
  std::vector<SiteId> neighbors_;
};

/// Geometric type of a level; one decimation cycle is 2 stages in 2D and 3 in 3D.
enum class LevelShape {
  kSquare,        ///< square lattice, axis bonds
  kCheckerboard,  ///< 2D checkerboard, diagonal bonds
  kCubic,         ///< cubic lattice, axis bonds
  kFaceCentered,  ///< 3D {x+y+z even}, 8-point stencil
  kStaggered,     ///< 3D {all even} u {odd,even,odd}, 12-point stencil
};

[[nodiscard]] std::string to_string(LevelShape shape);

/// One stencil partner after periodic duplicates are merged.
struct Partner {
  SiteId site;
  int multiplicity;
  friend bool operator==(const Partner&, const Partner&) = default;
};

/// A single level of the hierarchy.
struct Level {
  int index = 0;
  int spacing = 1;
  LevelShape shape = LevelShape::kSquare;
  /// Bond offsets in lattice units; closed under negation.
  std::vector<Coords> bond_offsets;
  /// All sites of the level, ascending.
  std::vector<SiteId> sites;
  /// Sites sampled at this stage (the level minus the next one); empty at the base.
  std::vector<SiteId> sampled;
  /// Sites carrying a stencil: `sampled` below the base, `sites` at the base.
  std::vector<SiteId> stencil_sites;
  /// Distinct partners of each stencil site, aligned with `stencil_sites`.
  std::vector<std::vector<Partner>> stencils;
};

/// Nested sublattices L0 > L1 > ... > Ln, each half the size of the previous.
///
/// Below the base, every stencil partner of a sampled site lies in the next
/// level, so the sampled sites of a stage are conditionally independent given
/// the next level. Immutable after construction.
class LevelHierarchy {
 public:
  LevelHierarchy(Lattice lattice, std::vector<Level> levels);

  [[nodiscard]] const Lattice& lattice() const noexcept { return lattice_; }
  [[nodiscard]] int base_level() const noexcept { return static_cast<int>(levels_.size()) - 1; }
  [[nodiscard]] int num_levels() const noexcept { return static_cast<int>(levels_.size()); }
  [[nodiscard]] const Level& level(int i) const { return levels_.at(static_cast<std::size_t>(i)); }
  [[nodiscard]] const Level& base() const noexcept { return levels_.back(); }

  /// Deepest level containing the site.
  [[nodiscard]] int classify(SiteId site) const noexcept { return depth_[static_cast<std::size_t>(site)]; }
  [[nodiscard]] bool contains(int level, SiteId site) const noexcept { return classify(site) >= level; }

  friend bool operator==(const LevelHierarchy& a, const LevelHierarchy& b);

 private:
  Lattice lattice_;
  std::vector<Level> levels_;
  std::vector<int> depth_;
};

/// Default size at which the recursion stops; 2^16 base states are enumerable.
inline constexpr int kDefaultBaseLimit = 16;

/// Builds the 2D hierarchy; levels are added until one has at most `base_limit` sites.
[[nodiscard]] LevelHierarchy build_hierarchy_2d(int side, int base_limit = kDefaultBaseLimit);
/// Builds the 3D hierarchy (three stages per cycle).
[[nodiscard]] LevelHierarchy build_hierarchy_3d(int side, int base_limit = kDefaultBaseLimit);
[[nodiscard]] LevelHierarchy build_hierarchy(int dim, int side, int base_limit = kDefaultBaseLimit);

/// Shape, spacing and bond offsets of level `index`, independent of any stop rule.
[[nodiscard]] LevelShape level_shape(int dim, int index);
[[nodiscard]] int level_spacing(int dim, int index);
[[nodiscard]] std::vector<Coords> level_bond_offsets(int dim, int index);
/// Sites of level `index` on `lattice`; throws if the level degenerates (spacing too large).
[[nodiscard]] std::vector<SiteId> level_sites(const Lattice& lattice, int index);

/// Distinct sites reached from `site` through `offsets`, in first-seen order.
/// Offsets that wrap back onto `site` are dropped.
[[nodiscard]] std::vector<Partner> collapse_partners(const Lattice& lattice, SiteId site,
                                                     std::span<const Coords> offsets);

/// Writes "level,x,y[,z]" rows, one per site, with the deepest level of each site.
void write_classification_csv(std::ostream& os, const LevelHierarchy& hierarchy);

}  // namespace chainless

#endif  // CHAINLESS_LATTICE_HPP
