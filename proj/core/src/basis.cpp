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

#include "chainless/basis.hpp"

#include <algorithm>
#include <sstream>
#include <utility>

namespace chainless {

namespace {

Coords negate(const Coords& c) { return {-c[0], -c[1], -c[2]}; }

std::string offset_text(const Coords& c, int dim) {
  std::ostringstream os;
  os << '(' << c[0] << ',' << c[1];
  if (dim == 3) {
    os << ',' << c[2];
  }
  os << ')';
  return os.str();
}

LinkageTerm pair_term(std::vector<Coords> offsets, std::string label) {
  LinkageTerm t;
  t.kind = TermKind::kPair;
  t.offsets = std::move(offsets);
  t.label = std::move(label);
  return t;
}

LinkageTerm odd_term(int power, double normalizer, std::vector<Coords> offsets, std::string label) {
  LinkageTerm t;
  t.kind = TermKind::kOddPower;
  t.power = power;
  t.normalizer = normalizer;
  t.offsets = std::move(offsets);
  t.label = std::move(label);
  return t;
}

}  // namespace

std::string describe(const LinkageTerm& term, int dim) {
  std::ostringstream os;
  os << term.label << ": ";
  if (term.kind == TermKind::kPair) {
    os << "pair";
  } else {
    os << "s*sigma^" << term.power << '/' << term.normalizer << " sigma";
  }
  os << " offsets";
  for (const auto& c : term.offsets) {
    os << ' ' << offset_text(c, dim);
  }
  return os.str();
}

void SiteBasis::add_pair(std::vector<SiteId> partners, std::vector<double> weights) {
  terms_.push_back({TermKind::kPair, 1, 1.0, std::move(partners), std::move(weights), {}, {}});
}

void SiteBasis::add_odd_power(int power, double normalizer, std::vector<SiteId> sigma_sites, std::vector<SiteId> outer,
                              std::vector<std::vector<SiteId>> outer_sigma) {
  terms_.push_back(
      {TermKind::kOddPower, power, 1.0 / normalizer, std::move(sigma_sites), {}, std::move(outer), std::move(outer_sigma)});
}

std::size_t BasisSet::max_terms() const noexcept {
  std::size_t m = 0;
  for (const auto& s : site_terms) {
    m = std::max(m, s.size());
  }
  return m;
}

std::string BasisSet::describe(int dim) const {
  std::ostringstream os;
  os << (role == BasisRole::kSampling ? "sampling" : "diagnostic") << " basis level=" << level << " spacing=" << spacing
     << " terms=" << terms.size() << '\n';
  for (const auto& t : terms) {
    os << "  " << chainless::describe(t, dim) << '\n';
  }
  return os.str();
}

void compile_term(const LinkageTerm& term, const Lattice& lattice, SiteId site, SiteBasis& out) {
  if (term.kind == TermKind::kPair) {
    std::vector<SiteId> partners;
    std::vector<double> weights;
    for (const auto& p : collapse_partners(lattice, site, term.offsets)) {
      partners.push_back(p.site);
      weights.push_back(2.0 * p.multiplicity);
    }
    out.add_pair(std::move(partners), std::move(weights));
    return;
  }
  auto sigma_of = [&](SiteId x) {
    std::vector<SiteId> s;
    s.reserve(term.offsets.size());
    for (const auto& v : term.offsets) {
      s.push_back(lattice.shift(x, v));
    }
    return s;
  };
  std::vector<SiteId> outer;
  std::vector<std::vector<SiteId>> outer_sigma;
  for (const auto& v : term.offsets) {
    const SiteId x = lattice.shift(site, negate(v));
    outer.push_back(x);
    outer_sigma.push_back(sigma_of(x));
  }
  out.add_odd_power(term.power, term.normalizer, sigma_of(site), std::move(outer), std::move(outer_sigma));
}

double derivative_at(const LinkageTerm& term, const Lattice& lattice, const SpinConfiguration& spins, SiteId site) {
  SiteBasis b;
  compile_term(term, lattice, site, b);
  double d = 0.0;
  b.derivatives(spins.values(), std::span<double>{&d, 1});
  return d;
}

BasisSet sampling_basis(const LevelHierarchy& hierarchy, int level) {
  if (level <= 0 || level > hierarchy.base_level()) {
    throw GeometryError("sampling basis exists for levels 1..n; level 0 uses the model Hamiltonian");
  }
  const Level& lv = hierarchy.level(level);
  BasisSet out;
  out.level = level;
  out.spacing = lv.spacing;
  out.role = BasisRole::kSampling;
  for (const auto& v : lv.bond_offsets) {
    out.terms.push_back(pair_term({v}, "psi" + offset_text(v, hierarchy.lattice().dim())));
  }
  out.sites = lv.stencil_sites;
  out.site_terms.reserve(lv.stencil_sites.size());
  for (const auto& stencil : lv.stencils) {
    SiteBasis sb;
    for (const auto& p : stencil) {
      sb.add_pair({p.site}, {2.0 * p.multiplicity});
    }
    out.site_terms.push_back(std::move(sb));
  }
  return out;
}

std::vector<LinkageTerm> diagnostic_terms_2d(int a) {
  std::vector<Coords> axis{{a, 0, 0}, {-a, 0, 0}, {0, a, 0}, {0, -a, 0}};
  return {
      pair_term({{a, a, 0}}, "psi1"),
      pair_term({{a, -a, 0}}, "psi2"),
      pair_term({{-a, a, 0}}, "psi3"),
      pair_term({{-a, -a, 0}}, "psi4"),
      pair_term({{2 * a, 0, 0}, {-2 * a, 0, 0}, {0, 2 * a, 0}, {0, -2 * a, 0}}, "psi5"),
      odd_term(3, 10.0, axis, "psi6"),
      odd_term(5, 100.0, axis, "psi7"),
  };
}

std::vector<LinkageTerm> diagnostic_terms_3d(int a) {
  std::vector<LinkageTerm> out;
  std::vector<Coords> axis;
  for (int k = 0; k < 3; ++k) {
    for (int sgn : {1, -1}) {
      Coords c{0, 0, 0};
      c[k] = sgn * a;
      axis.push_back(c);
    }
  }
  for (const auto& c : axis) {
    out.push_back(pair_term({c}, "axis" + offset_text(c, 3)));
  }
  for (int k = 0; k < 3; ++k) {
    for (int l = k + 1; l < 3; ++l) {
      for (int sk : {1, -1}) {
        for (int sl : {1, -1}) {
          Coords c{0, 0, 0};
          c[k] = sk * a;
          c[l] = sl * a;
          out.push_back(pair_term({c}, "diag" + offset_text(c, 3)));
        }
      }
    }
  }
  out.push_back(odd_term(3, 10.0, axis, "cube"));
  out.push_back(odd_term(5, 100.0, axis, "fifth"));
  return out;
}

BasisSet diagnostic_basis(const Lattice& lattice, int level) {
  const LevelShape shape = level_shape(lattice.dim(), level);
  if (shape != LevelShape::kSquare && shape != LevelShape::kCubic) {
    throw GeometryError("diagnostic bases exist only on square or cubic levels, level " + std::to_string(level) +
                        " is " + to_string(shape));
  }
  BasisSet out;
  out.level = level;
  out.spacing = level_spacing(lattice.dim(), level);
  out.role = BasisRole::kDiagnostic;
  out.terms = lattice.dim() == 2 ? diagnostic_terms_2d(out.spacing) : diagnostic_terms_3d(out.spacing);
  out.sites = level_sites(lattice, level);
  out.site_terms.reserve(out.sites.size());
  for (SiteId s : out.sites) {
    SiteBasis sb;
    for (const auto& t : out.terms) {
      compile_term(t, lattice, s, sb);
    }
    out.site_terms.push_back(std::move(sb));
  }
  return out;
}

}  // namespace chainless
