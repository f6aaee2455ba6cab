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

#include <gtest/gtest.h>

#include <algorithm>
#include <set>
#include <sstream>
#include <string>

namespace chainless {
namespace {

TEST(Lattice, NeighborsWrapPeriodically) {
  const Lattice l{2, 4};
  const SiteId origin = l.index({0, 0, 0});
  const auto n = l.neighbors(origin);
  ASSERT_EQ(n.size(), 4U);
  EXPECT_EQ(n[0], l.index({1, 0, 0}));
  EXPECT_EQ(n[1], l.index({3, 0, 0}));
  EXPECT_EQ(n[2], l.index({0, 1, 0}));
  EXPECT_EQ(n[3], l.index({0, 3, 0}));
  EXPECT_EQ(l.shift(origin, {-5, 9, 0}), l.index({3, 1, 0}));
}

TEST(Lattice, CoordsRoundTrip3d) {
  const Lattice l{3, 4};
  for (SiteId s = 0; s < l.size(); ++s) {
    EXPECT_EQ(l.index(l.coords(s)), s);
  }
}

void expect_well_formed(const LevelHierarchy& h) {
  const Lattice& lat = h.lattice();
  for (int i = 0; i < h.base_level(); ++i) {
    const Level& lv = h.level(i);
    EXPECT_EQ(lv.sites.size(), 2 * h.level(i + 1).sites.size()) << "level " << i;
    ASSERT_EQ(lv.stencils.size(), lv.stencil_sites.size());
    // Conditional independence: stencil partners of sampled sites live on the next level.
    for (std::size_t k = 0; k < lv.stencil_sites.size(); ++k) {
      EXPECT_FALSE(h.contains(i + 1, lv.stencil_sites[k]));
      for (const Partner& p : lv.stencils[k]) {
        EXPECT_TRUE(h.contains(i + 1, p.site)) << "level " << i;
      }
    }
  }
  std::vector<int> seen(static_cast<std::size_t>(lat.size()), 0);
  for (int i = 0; i < h.base_level(); ++i) {
    for (SiteId s : h.level(i).sampled) {
      ++seen[static_cast<std::size_t>(s)];
    }
  }
  for (SiteId s : h.base().sites) {
    ++seen[static_cast<std::size_t>(s)];
  }
  EXPECT_TRUE(std::all_of(seen.begin(), seen.end(), [](int c) { return c == 1; }));
}

TEST(Hierarchy, Ising16HalvesDownToSixteenSites) {
  const auto h = build_hierarchy_2d(16);
  ASSERT_EQ(h.base_level(), 4);
  EXPECT_EQ(h.level(0).sites.size(), 256U);
  EXPECT_EQ(h.base().sites.size(), 16U);
  EXPECT_EQ(h.level(1).shape, LevelShape::kCheckerboard);
  EXPECT_EQ(h.level(2).shape, LevelShape::kSquare);
  EXPECT_EQ(h.level(2).spacing, 2);
  EXPECT_EQ(h.level(4).spacing, 4);
  expect_well_formed(h);
}

TEST(Hierarchy, WellFormedAcrossSizes) {
  for (int side : {4, 8, 32, 64}) {
    expect_well_formed(build_hierarchy_2d(side));
  }
  for (int side : {4, 8}) {
    expect_well_formed(build_hierarchy_3d(side));
  }
}

TEST(Hierarchy, ThreeDimensionalCycle) {
  EXPECT_EQ(level_shape(3, 0), LevelShape::kCubic);
  EXPECT_EQ(level_shape(3, 1), LevelShape::kFaceCentered);
  EXPECT_EQ(level_shape(3, 2), LevelShape::kStaggered);
  EXPECT_EQ(level_shape(3, 3), LevelShape::kCubic);
  EXPECT_EQ(level_spacing(3, 3), 2);
  EXPECT_EQ(level_bond_offsets(3, 1).size(), 8U);
  EXPECT_EQ(level_bond_offsets(3, 2).size(), 12U);
  const auto h = build_hierarchy_3d(8);
  EXPECT_EQ(h.base().sites.size(), 16U);
  EXPECT_EQ(h.base().shape, LevelShape::kStaggered);
}

TEST(Hierarchy, SmallBaseLimitOnFourByFour) {
  const auto h = build_hierarchy_2d(4, 4);
  ASSERT_EQ(h.num_levels(), 3);
  EXPECT_EQ(h.level(0).sites.size(), 16U);
  EXPECT_EQ(h.level(1).sites.size(), 8U);
  EXPECT_EQ(h.base().sites.size(), 4U);
  expect_well_formed(h);
}

TEST(Hierarchy, DuplicatePartnersCollapse) {
  // Spacing 2 on a side-4 lattice: +2 and -2 reach the same site.
  const Lattice l{2, 4};
  const std::vector<Coords> offsets{{2, 0, 0}, {-2, 0, 0}, {0, 2, 0}, {0, -2, 0}};
  const auto p = collapse_partners(l, l.index({0, 0, 0}), offsets);
  ASSERT_EQ(p.size(), 2U);
  EXPECT_EQ(p[0], (Partner{l.index({2, 0, 0}), 2}));
  EXPECT_EQ(p[1], (Partner{l.index({0, 2, 0}), 2}));

  // Offsets that wrap onto the site itself are dropped.
  const std::vector<Coords> self{{4, 0, 0}};
  EXPECT_TRUE(collapse_partners(l, 0, self).empty());
}

TEST(Hierarchy, RejectsUnsupportedSides) {
  EXPECT_THROW(build_hierarchy_2d(6), GeometryError);
  EXPECT_THROW(build_hierarchy_2d(2), GeometryError);
  EXPECT_THROW(build_hierarchy(4, 8), GeometryError);
  EXPECT_THROW((void)level_sites(Lattice{2, 4}, 6), GeometryError);
}

TEST(Hierarchy, ClassificationCsvHasOneRowPerSite) {
  const auto h = build_hierarchy_2d(8);
  std::ostringstream os;
  write_classification_csv(os, h);
  std::istringstream is{os.str()};
  std::string line;
  int rows = 0;
  std::multiset<std::string> levels;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#' || line.rfind("level", 0) == 0) {
      continue;
    }
    ++rows;
    levels.insert(line.substr(0, line.find(',')));
  }
  EXPECT_EQ(rows, 64);
  EXPECT_EQ(levels.count("0"), 32U);
  EXPECT_EQ(levels.count(std::to_string(h.base_level())), h.base().sites.size());
}

TEST(Hierarchy, EqualityIsStructural) {
  EXPECT_TRUE(build_hierarchy_2d(8) == build_hierarchy_2d(8));
  EXPECT_FALSE(build_hierarchy_2d(8) == build_hierarchy_2d(8, 4));
}

}  // namespace
}  // namespace chainless
