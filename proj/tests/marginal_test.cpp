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

#include "chainless/marginal.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "chainless/exact_marginal.hpp"
#include "chainless/reference.hpp"
#include "chainless/rng.hpp"

namespace chainless {
namespace {

std::vector<SpinConfiguration> random_samples(const Lattice& l, std::size_t n, std::uint64_t seed) {
  std::vector<SpinConfiguration> out;
  Rng rng{seed};
  for (std::size_t k = 0; k < n; ++k) {
    SpinConfiguration s{l.size()};
    for (SiteId i = 0; i < l.size(); ++i) {
      s[i] = (rng() & 1U) != 0 ? 1 : -1;
    }
    out.push_back(std::move(s));
  }
  return out;
}

// Plain Gaussian elimination with partial pivoting.
std::vector<double> gauss_solve(std::vector<std::vector<double>> a, std::vector<double> b) {
  const std::size_t n = b.size();
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t p = c;
    for (std::size_t r = c + 1; r < n; ++r) {
      if (std::abs(a[r][c]) > std::abs(a[p][c])) {
        p = r;
      }
    }
    std::swap(a[c], a[p]);
    std::swap(b[c], b[p]);
    for (std::size_t r = c + 1; r < n; ++r) {
      const double f = a[r][c] / a[c][c];
      for (std::size_t k = c; k < n; ++k) {
        a[r][k] -= f * a[c][k];
      }
      b[r] -= f * b[c];
    }
  }
  std::vector<double> x(n);
  for (std::size_t i = n; i-- > 0;) {
    double s = b[i];
    for (std::size_t k = i + 1; k < n; ++k) {
      s -= a[i][k] * x[k];
    }
    x[i] = s / a[i][i];
  }
  return x;
}

TEST(Projection, ExactTableMatchesHandBuiltNormalEquations) {
  const auto h = build_hierarchy_2d(4, 4);
  const auto c = CouplingField::uniform(h.lattice(), 1.0 / 2.2);
  const EnumerationOracle oracle{c};
  const auto bases = sampling_bases(h);
  const auto table = exact_projection_table(oracle, h, bases);

  const BasisSet& b1 = bases[0];
  ASSERT_EQ(b1.level, 1);
  for (std::size_t slot = 0; slot < b1.sites.size(); ++slot) {
    const SiteId u = b1.sites[slot];
    const std::size_t m = b1.site_terms[slot].size();
    std::vector<std::vector<double>> a(m, std::vector<double>(m, 0.0));
    std::vector<double> rhs(m, 0.0);
    std::vector<double> phi(m);
    oracle.for_each([&](std::uint32_t, std::span<const std::int8_t> s, double p) {
      b1.site_terms[slot].derivatives(s, std::span<double>{phi});
      const double target = local_field(s, c, u);
      for (std::size_t i = 0; i < m; ++i) {
        rhs[i] += p * target * phi[i];
        for (std::size_t j = 0; j < m; ++j) {
          a[i][j] += p * phi[i] * phi[j];
        }
      }
    });
    const auto x = gauss_solve(a, rhs);
    const auto got = table.at(1, slot);
    ASSERT_EQ(got.size(), m);
    for (std::size_t i = 0; i < m; ++i) {
      EXPECT_NEAR(got[i], x[i], 1e-10);
    }
  }
}

TEST(Projection, MergeEqualsSinglePass) {
  const auto h = build_hierarchy_2d(8);
  const auto c = CouplingField::uniform(h.lattice(), 0.4);
  const auto bases = sampling_bases(h);
  const auto all = random_samples(h.lattice(), 300, 1);
  const std::span<const SpinConfiguration> view{all};
  const auto whole = accumulate_projection(view, bases, c);
  auto left = accumulate_projection(view.first(128), bases, c);
  const auto right = accumulate_projection(view.subspan(128), bases, c);
  for (std::size_t k = 0; k < bases.size(); ++k) {
    left[k].merge(right[k]);
    EXPECT_EQ(left[k].count(), whole[k].count());
    for (std::size_t slot = 0; slot < whole[k].num_sites(); ++slot) {
      const auto g1 = left[k].gram(slot);
      const auto g2 = whole[k].gram(slot);
      for (std::size_t i = 0; i < g1.size(); ++i) {
        EXPECT_NEAR(g1[i], g2[i], 1e-12 * (1.0 + std::abs(g2[i])));
      }
    }
  }
}

TEST(Projection, ThreadCountDoesNotChangeResult) {
  const auto h = build_hierarchy_2d(16);
  const auto c = CouplingField::uniform(h.lattice(), 0.45);
  const auto bases = sampling_bases(h);
  const auto samples = random_samples(h.lattice(), 700, 2);
  std::vector<double> w(samples.size());
  for (std::size_t i = 0; i < w.size(); ++i) {
    w[i] = 0.5 + static_cast<double>(i % 7);
  }
  const auto t1 = solve_coefficients(accumulate_projection(samples, bases, c, w, 1), bases);
  const auto t4 = solve_coefficients(accumulate_projection(samples, bases, c, w, 4), bases);
  EXPECT_TRUE(t1 == t4);
}

TEST(Projection, SingularSystemsAreJettisoned) {
  const auto h = build_hierarchy_2d(8);
  const auto c = CouplingField::uniform(h.lattice(), 0.4);
  const auto bases = sampling_bases(h);
  const std::vector<SpinConfiguration> same(50, SpinConfiguration{h.lattice().size()});
  SolveReport report;
  const auto table = solve_coefficients(accumulate_projection(same, bases, c), bases, {}, &report);
  EXPECT_EQ(report.jettisoned, report.sites);
  EXPECT_EQ(table.jettison_count(), table.site_count());
  EXPECT_FALSE(report.warnings.empty());
  for (std::size_t k = 0; k < table.num_blocks(); ++k) {
    for (double v : table.block(k).values) {
      EXPECT_EQ(v, 0.0);
    }
  }
  // The minimum-norm policy splits the target across identical columns instead.
  SolvePolicy pinv;
  pinv.method = SolveMethod::kMinimumNorm;
  SolveReport r2;
  const auto t2 = solve_coefficients(accumulate_projection(same, bases, c), bases, pinv, &r2);
  EXPECT_EQ(r2.jettisoned, 0U);
  const auto a = t2.at(1, 0);
  // All-up: every phi is 2 and W0' is 4 * 0.4, so the coefficients sum to 0.8.
  double sum = 0.0;
  for (double x : a) {
    sum += x;
    EXPECT_NEAR(x, a[0], 1e-12);
  }
  EXPECT_NEAR(sum, 0.8, 1e-12);
}

TEST(Projection, RejectsBadInput) {
  const auto h = build_hierarchy_2d(8);
  const auto c = CouplingField::uniform(h.lattice(), 0.4);
  const auto bases = sampling_bases(h);
  EXPECT_THROW((void)accumulate_projection({}, bases, c), std::invalid_argument);
  const auto s = random_samples(h.lattice(), 3, 1);
  const std::vector<double> w{1.0};
  EXPECT_THROW((void)accumulate_projection(s, bases, c, w), std::invalid_argument);
  const auto wrong = random_samples(Lattice{2, 4}, 3, 1);
  EXPECT_THROW((void)accumulate_projection(wrong, bases, c), SizeMismatch);
}

TEST(Symmetrize, IsIdempotentAndAveragesEndpoints) {
  const auto h = build_hierarchy_2d(16);
  const auto c = CouplingField::uniform(h.lattice(), 0.45);
  const auto bases = sampling_bases(h);
  const auto samples = random_samples(h.lattice(), 400, 3);
  const auto raw = solve_coefficients(accumulate_projection(samples, bases, c), bases);
  SymmetrizeReport rep;
  const auto once = symmetrize(raw, h, &rep);
  EXPECT_GT(rep.pairs, 0U);
  EXPECT_TRUE(symmetrize(once, h) == once);

  // Sum over the base is preserved by averaging endpoint pairs.
  const auto& before = raw.level(h.base_level()).values;
  const auto& after = once.level(h.base_level()).values;
  double s0 = 0.0;
  double s1 = 0.0;
  for (std::size_t i = 0; i < before.size(); ++i) {
    s0 += before[i];
    s1 += after[i];
  }
  EXPECT_NEAR(s0, s1, 1e-12);
  // Non-base levels are untouched.
  EXPECT_EQ(raw.level(1).values, once.level(1).values);
}

TEST(CoefficientFile, RoundTripAndCorruption) {
  const auto h = build_hierarchy_2d(8);
  const auto bases = sampling_bases(h);
  CoefficientTable t{bases, 0.0};
  for (std::size_t k = 0; k < t.num_blocks(); ++k) {
    auto& v = t.block(k).values;
    for (std::size_t i = 0; i < v.size(); ++i) {
      v[i] = 0.01 * static_cast<double>(i) - 0.3 + 1e-17 * static_cast<double>(k);
    }
  }
  t.block(0).jettisoned[1] = 1;
  t.basis_description = "test basis";
  t.sample_count = 1000;
  t.seed = 42;
  std::stringstream ss;
  write_coefficients(ss, t, h.lattice());
  const std::string text = ss.str();
  const auto back = read_coefficients(ss, h.lattice(), bases);
  EXPECT_TRUE(back == t);
  EXPECT_EQ(back.seed, 42U);
  EXPECT_EQ(back.sample_count, 1000);

  // Truncated file.
  std::istringstream cut{text.substr(0, text.size() / 2)};
  EXPECT_THROW((void)read_coefficients(cut, h.lattice(), bases), std::runtime_error);
  // Garbage value.
  std::string bad = text;
  bad.replace(bad.rfind(' ', bad.size() - 4), 2, " x");
  std::istringstream garbled{bad};
  EXPECT_THROW((void)read_coefficients(garbled, h.lattice(), bases), std::runtime_error);
  // Wrong lattice.
  const auto h16 = build_hierarchy_2d(16);
  std::istringstream other{text};
  EXPECT_THROW((void)read_coefficients(other, h16.lattice(), sampling_bases(h16)), std::runtime_error);
}

}  // namespace
}  // namespace chainless
