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

#include "chainless/lattice.hpp"

#include <algorithm>
#include <bit>
#include <ostream>
#include <utility>

namespace chainless {

namespace {

int wrap(int x, int n) noexcept {
  const int r = x % n;
  return r < 0 ? r + n : r;
}

bool is_power_of_two(int n) noexcept { return n > 0 && std::has_single_bit(static_cast<unsigned>(n)); }

// Membership test in units of the level spacing, for coordinates already on the spacing grid.
bool member_scaled(int dim, int stage, const Coords& x) noexcept {
  if (dim == 2) {
    return stage == 0 || (x[0] + x[1]) % 2 == 0;
  }
  switch (stage) {
    case 0:
      return true;
    case 1:
      return (x[0] + x[1] + x[2]) % 2 == 0;
    default:
      return x[1] % 2 == 0 && x[0] % 2 == x[2] % 2;
  }
}

int stages_per_cycle(int dim) { return dim == 2 ? 2 : 3; }

void check_dim(int dim) {
  if (dim != 2 && dim != 3) {
    throw GeometryError("dimension must be 2 or 3, got " + std::to_string(dim));
  }
}

}  // namespace

Lattice::Lattice(int dim, int side) : dim_{dim}, side_{side} {
  check_dim(dim);
  if (side < 2) {
    throw GeometryError("lattice side must be at least 2, got " + std::to_string(side));
  }
  size_ = dim == 2 ? side * side : side * side * side;
  neighbors_.resize(static_cast<std::size_t>(size_) * 2 * dim_);
  for (SiteId s = 0; s < size_; ++s) {
    const Coords c = coords(s);
    for (int axis = 0; axis < dim_; ++axis) {
      Coords up = c;
      Coords down = c;
      up[axis] += 1;
      down[axis] -= 1;
      neighbors_[static_cast<std::size_t>(s) * 2 * dim_ + 2 * axis] = index(up);
      neighbors_[static_cast<std::size_t>(s) * 2 * dim_ + 2 * axis + 1] = index(down);
    }
  }
}

SiteId Lattice::index(const Coords& c) const noexcept {
  SiteId id = 0;
  for (int axis = dim_ - 1; axis >= 0; --axis) {
    id = id * side_ + wrap(c[axis], side_);
  }
  return id;
}

Coords Lattice::coords(SiteId site) const noexcept {
  Coords c{0, 0, 0};
  for (int axis = 0; axis < dim_; ++axis) {
    c[axis] = site % side_;
    site /= side_;
  }
  return c;
}

SiteId Lattice::shift(SiteId site, const Coords& offset) const noexcept {
  Coords c = coords(site);
  for (int axis = 0; axis < dim_; ++axis) {
    c[axis] += offset[axis];
  }
  return index(c);
}

std::string to_string(LevelShape shape) {
  switch (shape) {
    case LevelShape::kSquare:
      return "square";
    case LevelShape::kCheckerboard:
      return "checkerboard";
    case LevelShape::kCubic:
      return "cubic";
    case LevelShape::kFaceCentered:
      return "face-centered";
    case LevelShape::kStaggered:
      return "staggered";
  }
  return "unknown";
}

LevelShape level_shape(int dim, int index) {
  check_dim(dim);
  const int stage = index % stages_per_cycle(dim);
  if (dim == 2) {
    return stage == 0 ? LevelShape::kSquare : LevelShape::kCheckerboard;
  }
  return stage == 0 ? LevelShape::kCubic : (stage == 1 ? LevelShape::kFaceCentered : LevelShape::kStaggered);
}

int level_spacing(int dim, int index) {
  check_dim(dim);
  if (index < 0) {
    throw GeometryError("negative level index");
  }
  return 1 << (index / stages_per_cycle(dim));
}

std::vector<Coords> level_bond_offsets(int dim, int index) {
  const int a = level_spacing(dim, index);
  const int stage = index % stages_per_cycle(dim);
  std::vector<Coords> unit;
  if (dim == 2) {
    if (stage == 0) {
      unit = {{1, 0, 0}, {-1, 0, 0}, {0, 1, 0}, {0, -1, 0}};
    } else {
      unit = {{1, 1, 0}, {1, -1, 0}, {-1, 1, 0}, {-1, -1, 0}};
    }
  } else if (stage == 0) {
    unit = {{1, 0, 0}, {-1, 0, 0}, {0, 1, 0}, {0, -1, 0}, {0, 0, 1}, {0, 0, -1}};
  } else if (stage == 1) {
    unit = {{0, 1, 1}, {0, 1, -1}, {0, -1, 1}, {0, -1, -1},
            {1, 1, 0}, {1, -1, 0}, {-1, 1, 0}, {-1, -1, 0}};
  } else {
    unit = {{1, 0, 1},  {1, 0, -1},  {-1, 0, 1},  {-1, 0, -1},  {1, 2, 1},   {1, 2, -1},
            {-1, 2, 1}, {-1, 2, -1}, {1, -2, 1},  {1, -2, -1},  {-1, -2, 1}, {-1, -2, -1}};
  }
  for (auto& c : unit) {
    for (auto& x : c) {
      x *= a;
    }
  }
  return unit;
}

std::vector<SiteId> level_sites(const Lattice& lattice, int index) {
  const int dim = lattice.dim();
  const int a = level_spacing(dim, index);
  const int stage = index % stages_per_cycle(dim);
  const int cells = lattice.side() / a;
  if (a > lattice.side() || lattice.side() % a != 0 || (stage != 0 && cells % 2 != 0)) {
    throw GeometryError("level " + std::to_string(index) + " does not fit a lattice of side " +
                        std::to_string(lattice.side()));
  }
  std::vector<SiteId> out;
  for (SiteId s = 0; s < lattice.size(); ++s) {
    const Coords c = lattice.coords(s);
    bool on_grid = true;
    Coords scaled{0, 0, 0};
    for (int axis = 0; axis < dim; ++axis) {
      on_grid = on_grid && c[axis] % a == 0;
      scaled[axis] = c[axis] / a;
    }
    if (on_grid && member_scaled(dim, stage, scaled)) {
      out.push_back(s);
    }
  }
  return out;
}

std::vector<Partner> collapse_partners(const Lattice& lattice, SiteId site, std::span<const Coords> offsets) {
  std::vector<Partner> out;
  for (const auto& off : offsets) {
    const SiteId p = lattice.shift(site, off);
    if (p == site) {
      continue;
    }
    auto it = std::find_if(out.begin(), out.end(), [p](const Partner& q) { return q.site == p; });
    if (it == out.end()) {
      out.push_back({p, 1});
    } else {
      ++it->multiplicity;
    }
  }
  return out;
}

LevelHierarchy::LevelHierarchy(Lattice lattice, std::vector<Level> levels)
    : lattice_{std::move(lattice)}, levels_{std::move(levels)}, depth_(static_cast<std::size_t>(lattice_.size()), -1) {
  if (levels_.empty()) {
    throw GeometryError("hierarchy needs at least one level");
  }
  for (const auto& level : levels_) {
    for (SiteId s : level.sites) {
      depth_[static_cast<std::size_t>(s)] = level.index;
    }
  }
}

bool operator==(const LevelHierarchy& a, const LevelHierarchy& b) {
  if (!(a.lattice_ == b.lattice_) || a.levels_.size() != b.levels_.size()) {
    return false;
  }
  for (std::size_t i = 0; i < a.levels_.size(); ++i) {
    const Level& x = a.levels_[i];
    const Level& y = b.levels_[i];
    if (x.index != y.index || x.spacing != y.spacing || x.shape != y.shape || x.bond_offsets != y.bond_offsets ||
        x.sites != y.sites || x.sampled != y.sampled || x.stencil_sites != y.stencil_sites ||
        x.stencils != y.stencils) {
      return false;
    }
  }
  return true;
}

LevelHierarchy build_hierarchy(int dim, int side, int base_limit) {
  check_dim(dim);
  if (side < 4 || !is_power_of_two(side)) {
    throw GeometryError("hierarchy side must be a power of 2 and at least 4, got " + std::to_string(side));
  }
  if (base_limit < 2) {
    throw GeometryError("base_limit must be at least 2");
  }
  Lattice lattice{dim, side};

  std::vector<Level> levels;
  std::vector<SiteId> current = level_sites(lattice, 0);
  for (int i = 0;; ++i) {
    Level level;
    level.index = i;
    level.spacing = level_spacing(dim, i);
    level.shape = level_shape(dim, i);
    level.bond_offsets = level_bond_offsets(dim, i);
    level.sites = current;
    if (static_cast<int>(current.size()) <= base_limit) {
      levels.push_back(std::move(level));
      break;
    }
    std::vector<SiteId> next = level_sites(lattice, i + 1);
    if (next.size() * 2 != current.size()) {
      throw std::logic_error("level " + std::to_string(i + 1) + " does not halve level " + std::to_string(i));
    }
    std::set_difference(current.begin(), current.end(), next.begin(), next.end(), std::back_inserter(level.sampled));
    levels.push_back(std::move(level));
    current = std::move(next);
  }

  std::vector<int> depth(static_cast<std::size_t>(lattice.size()), -1);
  for (const auto& level : levels) {
    for (SiteId s : level.sites) {
      depth[static_cast<std::size_t>(s)] = level.index;
    }
  }
  const int n = static_cast<int>(levels.size()) - 1;
  for (auto& level : levels) {
    level.stencil_sites = level.index < n ? level.sampled : level.sites;
    level.stencils.reserve(level.stencil_sites.size());
    const int target = level.index < n ? level.index + 1 : level.index;
    for (SiteId s : level.stencil_sites) {
      auto partners = collapse_partners(lattice, s, level.bond_offsets);
      for (const auto& p : partners) {
        if (depth[static_cast<std::size_t>(p.site)] < target) {
          throw std::logic_error("stencil partner outside the next level at level " + std::to_string(level.index));
        }
      }
      level.stencils.push_back(std::move(partners));
    }
  }
  return LevelHierarchy{std::move(lattice), std::move(levels)};
}

LevelHierarchy build_hierarchy_2d(int side, int base_limit) { return build_hierarchy(2, side, base_limit); }

LevelHierarchy build_hierarchy_3d(int side, int base_limit) { return build_hierarchy(3, side, base_limit); }

void write_classification_csv(std::ostream& os, const LevelHierarchy& hierarchy) {
  const Lattice& lat = hierarchy.lattice();
  os << (lat.dim() == 2 ? "level,x,y\n" : "level,x,y,z\n");
  for (SiteId s = 0; s < lat.size(); ++s) {
    const Coords c = lat.coords(s);
    os << hierarchy.classify(s) << ',' << c[0] << ',' << c[1];
    if (lat.dim() == 3) {
      os << ',' << c[2];
    }
    os << '\n';
  }
}

}  // namespace chainless
