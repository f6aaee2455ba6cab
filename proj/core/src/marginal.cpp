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

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <tuple>

#include "chainless/parallel.hpp"

namespace chainless {

// ---------------------------------------------------------------------------
// ProjectionSystem

ProjectionSystem::ProjectionSystem(const BasisSet& basis) : level_{basis.level} {
  sizes_.reserve(basis.site_terms.size());
  offsets_.reserve(basis.site_terms.size() + 1);
  std::size_t total = 0;
  for (const auto& st : basis.site_terms) {
    sizes_.push_back(st.size());
    offsets_.push_back(total);
    total += st.size() * st.size() + st.size();
  }
  offsets_.push_back(total);
  sums_.assign(total, 0.0);
}

void ProjectionSystem::add(std::span<const std::int8_t> spins, const CouplingField& couplings, const BasisSet& basis,
                           double weight) {
  std::vector<double> phi;
  for (std::size_t k = 0; k < sizes_.size(); ++k) {
    const std::size_t m = sizes_[k];
    phi.resize(m);
    basis.site_terms[k].derivatives(spins, std::span<double>{phi});
    const double target = weight * local_field(spins, couplings, basis.sites[k]);
    double* a = sums_.data() + offsets_[k];
    double* b = a + m * m;
    for (std::size_t p = 0; p < m; ++p) {
      const double wp = weight * phi[p];
      for (std::size_t q = p; q < m; ++q) {
        a[p * m + q] += wp * phi[q];
      }
      b[p] += target * phi[p];
    }
  }
  ++count_;
  total_weight_ += weight;
}

void ProjectionSystem::merge(const ProjectionSystem& other) {
  if (other.sizes_ != sizes_ || other.level_ != level_) {
    throw std::invalid_argument("cannot merge projection systems of different bases");
  }
  for (std::size_t k = 0; k < sums_.size(); ++k) {
    sums_[k] += other.sums_[k];
  }
  count_ += other.count_;
  total_weight_ += other.total_weight_;
}

std::vector<double> ProjectionSystem::gram(std::size_t slot) const {
  const std::size_t m = sizes_.at(slot);
  const double* a = sums_.data() + offsets_[slot];
  std::vector<double> out(m * m);
  for (std::size_t p = 0; p < m; ++p) {
    for (std::size_t q = p; q < m; ++q) {
      out[p * m + q] = a[p * m + q] / total_weight_;
      out[q * m + p] = out[p * m + q];
    }
  }
  return out;
}

std::vector<double> ProjectionSystem::moment(std::size_t slot) const {
  const std::size_t m = sizes_.at(slot);
  const double* b = sums_.data() + offsets_[slot] + m * m;
  std::vector<double> out(m);
  for (std::size_t p = 0; p < m; ++p) {
    out[p] = b[p] / total_weight_;
  }
  return out;
}

// ---------------------------------------------------------------------------
// CoefficientTable

CoefficientTable::CoefficientTable(std::span<const BasisSet> bases, double value) {
  blocks_.reserve(bases.size());
  for (const auto& basis : bases) {
    LevelBlock b;
    b.level = basis.level;
    b.sites = basis.sites;
    b.offsets.reserve(basis.sites.size() + 1);
    std::size_t total = 0;
    for (const auto& st : basis.site_terms) {
      b.offsets.push_back(total);
      total += st.size();
    }
    b.offsets.push_back(total);
    b.values.assign(total, value);
    b.jettisoned.assign(basis.sites.size(), 0);
    blocks_.push_back(std::move(b));
  }
}

const CoefficientTable::LevelBlock& CoefficientTable::level(int level) const {
  for (const auto& b : blocks_) {
    if (b.level == level) {
      return b;
    }
  }
  throw std::out_of_range("coefficient table has no level " + std::to_string(level));
}

CoefficientTable::LevelBlock& CoefficientTable::level(int level) {
  return const_cast<LevelBlock&>(std::as_const(*this).level(level));
}

std::span<const double> CoefficientTable::at(int lv, std::size_t slot) const {
  const LevelBlock& b = level(lv);
  return {b.values.data() + b.offsets.at(slot), b.offsets.at(slot + 1) - b.offsets[slot]};
}

std::span<double> CoefficientTable::at(int lv, std::size_t slot) {
  LevelBlock& b = level(lv);
  return {b.values.data() + b.offsets.at(slot), b.offsets.at(slot + 1) - b.offsets[slot]};
}

std::size_t CoefficientTable::jettison_count() const noexcept {
  std::size_t n = 0;
  for (const auto& b : blocks_) {
    n += static_cast<std::size_t>(std::count(b.jettisoned.begin(), b.jettisoned.end(), std::uint8_t{1}));
  }
  return n;
}

std::size_t CoefficientTable::site_count() const noexcept {
  std::size_t n = 0;
  for (const auto& b : blocks_) {
    n += b.sites.size();
  }
  return n;
}

bool CoefficientTable::same_shape(const CoefficientTable& other) const noexcept {
  if (blocks_.size() != other.blocks_.size()) {
    return false;
  }
  for (std::size_t k = 0; k < blocks_.size(); ++k) {
    if (blocks_[k].level != other.blocks_[k].level || blocks_[k].sites != other.blocks_[k].sites ||
        blocks_[k].offsets != other.blocks_[k].offsets) {
      return false;
    }
  }
  return true;
}

bool operator==(const CoefficientTable& a, const CoefficientTable& b) {
  if (!a.same_shape(b)) {
    return false;
  }
  for (std::size_t k = 0; k < a.blocks_.size(); ++k) {
    if (a.blocks_[k].values != b.blocks_[k].values || a.blocks_[k].jettisoned != b.blocks_[k].jettisoned) {
      return false;
    }
  }
  return true;
}

// ---------------------------------------------------------------------------
// Accumulation and solve

std::vector<BasisSet> sampling_bases(const LevelHierarchy& hierarchy) {
  std::vector<BasisSet> out;
  for (int i = 1; i <= hierarchy.base_level(); ++i) {
    out.push_back(sampling_basis(hierarchy, i));
  }
  return out;
}

namespace {

constexpr std::size_t kChunk = 128;

std::vector<ProjectionSystem> empty_systems(std::span<const BasisSet> bases) {
  std::vector<ProjectionSystem> out;
  out.reserve(bases.size());
  for (const auto& b : bases) {
    out.emplace_back(b);
  }
  return out;
}

}  // namespace

std::vector<ProjectionSystem> accumulate_projection(std::span<const SpinConfiguration> samples,
                                                    std::span<const BasisSet> bases, const CouplingField& couplings,
                                                    std::span<const double> weights, int threads) {
  if (samples.empty()) {
    throw std::invalid_argument("accumulate_projection: empty sample stream");
  }
  if (!weights.empty() && weights.size() != samples.size()) {
    throw std::invalid_argument("accumulate_projection: weights and samples differ in length");
  }
  const std::size_t chunks = (samples.size() + kChunk - 1) / kChunk;
  std::vector<std::vector<ProjectionSystem>> partial(chunks);
  parallel_for(chunks, threads, [&](std::size_t c) {
    auto systems = empty_systems(bases);
    const std::size_t end = std::min(samples.size(), (c + 1) * kChunk);
    for (std::size_t i = c * kChunk; i < end; ++i) {
      if (samples[i].size() != couplings.lattice().size()) {
        throw SizeMismatch("sample does not match the coupling lattice");
      }
      const double w = weights.empty() ? 1.0 : weights[i];
      for (std::size_t k = 0; k < bases.size(); ++k) {
        systems[k].add(samples[i].values(), couplings, bases[k], w);
      }
    }
    partial[c] = std::move(systems);
  });
  std::vector<ProjectionSystem> out = std::move(partial[0]);
  for (std::size_t c = 1; c < chunks; ++c) {
    for (std::size_t k = 0; k < out.size(); ++k) {
      out[k].merge(partial[c][k]);
    }
  }
  return out;
}

CoefficientTable solve_coefficients(std::span<const ProjectionSystem> systems, std::span<const BasisSet> bases,
                                    const SolvePolicy& policy, SolveReport* report) {
  if (systems.size() != bases.size()) {
    throw std::invalid_argument("solve_coefficients: one system per basis required");
  }
  CoefficientTable table{bases, 0.0};
  SolveReport local;
  for (std::size_t k = 0; k < systems.size(); ++k) {
    const ProjectionSystem& sys = systems[k];
    if (sys.count() == 0 || !(sys.total_weight() > 0.0)) {
      throw std::invalid_argument("solve_coefficients: level " + std::to_string(sys.level()) + " has no samples");
    }
    auto& block = table.block(k);
    for (std::size_t slot = 0; slot < sys.num_sites(); ++slot) {
      const auto m = static_cast<Eigen::Index>(sys.terms(slot));
      ++local.sites;
      if (m == 0) {
        continue;
      }
      const auto g = sys.gram(slot);
      const auto mo = sys.moment(slot);
      const Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> a(g.data(), m, m);
      const Eigen::Map<const Eigen::VectorXd> b(mo.data(), m);
      Eigen::VectorXd x;
      bool ok = true;
      if (policy.method == SolveMethod::kJettison) {
        Eigen::LDLT<Eigen::MatrixXd> ldlt(a);
        // rcond() alone misses exactly zero pivots, which LDLT skips silently.
        const Eigen::VectorXd d = ldlt.vectorD().cwiseAbs();
        ok = ldlt.info() == Eigen::Success && ldlt.rcond() >= policy.rcond_threshold &&
             d.minCoeff() >= policy.rcond_threshold * d.maxCoeff() && d.maxCoeff() > 0.0;
        if (ok) {
          x = ldlt.solve(b);
          const Eigen::VectorXd r = b - a * x;
          x += ldlt.solve(r);
        }
      } else {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(a);
        const Eigen::VectorXd& lam = eig.eigenvalues();
        const double cutoff = policy.rcond_threshold * std::max(lam.cwiseAbs().maxCoeff(), 0.0);
        Eigen::VectorXd inv = Eigen::VectorXd::Zero(m);
        for (Eigen::Index i = 0; i < m; ++i) {
          if (lam(i) > cutoff && lam(i) > 0.0) {
            inv(i) = 1.0 / lam(i);
          }
        }
        x = eig.eigenvectors() * (inv.asDiagonal() * (eig.eigenvectors().transpose() * b));
      }
      ok = ok && x.allFinite();
      auto dst = std::span<double>{block.values.data() + block.offsets[slot], static_cast<std::size_t>(m)};
      if (!ok) {
        block.jettisoned[slot] = 1;
        ++local.jettisoned;
        std::fill(dst.begin(), dst.end(), 0.0);
        continue;
      }
      if (policy.method == SolveMethod::kJettison) {
        const double bn = b.norm();
        const double rn = (a * x - b).norm();
        if (bn > 0.0) {
          local.max_relative_residual = std::max(local.max_relative_residual, rn / bn);
        }
      }
      for (Eigen::Index i = 0; i < m; ++i) {
        dst[static_cast<std::size_t>(i)] = x(i);
      }
    }
  }
  if (local.sites > 0 &&
      static_cast<double>(local.jettisoned) > policy.alarm_fraction * static_cast<double>(local.sites)) {
    std::ostringstream os;
    os << "jettisoned " << local.jettisoned << " of " << local.sites << " site systems (alarm at "
       << policy.alarm_fraction * 100.0 << "%)";
    local.warnings.push_back(os.str());
  }
  table.sample_count = systems.empty() ? 0 : systems.front().count();
  if (report != nullptr) {
    *report = std::move(local);
  }
  return table;
}

CoefficientTable symmetrize(const CoefficientTable& table, const LevelHierarchy& hierarchy,
                            SymmetrizeReport* report) {
  CoefficientTable out = table;
  const Level& base = hierarchy.base();
  auto& block = out.level(base.index);
  const auto& src = table.level(base.index);
  if (block.sites != base.stencil_sites) {
    throw std::invalid_argument("symmetrize: table does not match the hierarchy base level");
  }
  std::map<SiteId, std::size_t> slot_of;
  for (std::size_t k = 0; k < base.stencil_sites.size(); ++k) {
    slot_of[base.stencil_sites[k]] = k;
  }
  std::vector<double> xs;
  std::vector<double> ys;
  for (std::size_t u = 0; u < base.stencils.size(); ++u) {
    for (std::size_t p = 0; p < base.stencils[u].size(); ++p) {
      const SiteId w_site = base.stencils[u][p].site;
      const std::size_t w = slot_of.at(w_site);
      const auto& wst = base.stencils[w];
      const auto it = std::find_if(wst.begin(), wst.end(),
                                   [&](const Partner& q) { return q.site == base.stencil_sites[u]; });
      if (it == wst.end()) {
        throw std::logic_error("symmetrize: asymmetric base stencil");
      }
      const auto q = static_cast<std::size_t>(it - wst.begin());
      const double mine = src.values[src.offsets[u] + p];
      const double theirs = src.values[src.offsets[w] + q];
      double value = 0.5 * (mine + theirs);
      if (src.jettisoned[u] != 0 && src.jettisoned[w] == 0) {
        value = theirs;
      } else if (src.jettisoned[w] != 0 && src.jettisoned[u] == 0) {
        value = mine;
      }
      block.values[block.offsets[u] + p] = value;
      if (u < w) {
        xs.push_back(mine);
        ys.push_back(theirs);
      }
    }
  }
  if (report != nullptr) {
    report->pairs = xs.size();
    const auto n = static_cast<double>(xs.size());
    double mx = 0.0;
    double my = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      mx += xs[i];
      my += ys[i];
    }
    mx /= n;
    my /= n;
    double sxy = 0.0;
    double sxx = 0.0;
    double syy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      sxy += (xs[i] - mx) * (ys[i] - my);
      sxx += (xs[i] - mx) * (xs[i] - mx);
      syy += (ys[i] - my) * (ys[i] - my);
    }
    report->endpoint_correlation =
        sxx > 0.0 && syy > 0.0 ? sxy / std::sqrt(sxx * syy) : std::numeric_limits<double>::quiet_NaN();
  }
  return out;
}

// ---------------------------------------------------------------------------
// Persistence

void write_coefficients(std::ostream& os, const CoefficientTable& table, const Lattice& lattice) {
  os << "# chainless coefficients v1\n";
  os << "# dim = " << lattice.dim() << '\n';
  os << "# side = " << lattice.side() << '\n';
  os << "# seed = " << table.seed << '\n';
  os << "# samples = " << table.sample_count << '\n';
  std::istringstream desc{table.basis_description};
  for (std::string line; std::getline(desc, line);) {
    os << "# basis: " << line << '\n';
  }
  os << (lattice.dim() == 2 ? "# level x y term value jettisoned\n" : "# level x y z term value jettisoned\n");
  for (std::size_t k = 0; k < table.num_blocks(); ++k) {
    const auto& b = table.block(k);
    for (std::size_t slot = 0; slot < b.sites.size(); ++slot) {
      const Coords c = lattice.coords(b.sites[slot]);
      for (std::size_t t = b.offsets[slot]; t < b.offsets[slot + 1]; ++t) {
        os << b.level;
        for (int d = 0; d < lattice.dim(); ++d) {
          os << ' ' << c[d];
        }
        os << ' ' << (t - b.offsets[slot]) << ' ' << std::setprecision(17) << b.values[t] << ' '
           << static_cast<int>(b.jettisoned[slot]) << '\n';
      }
    }
  }
}

CoefficientTable read_coefficients(std::istream& is, const Lattice& lattice, std::span<const BasisSet> bases) {
  CoefficientTable table{bases, 0.0};
  std::vector<std::vector<std::uint8_t>> seen(table.num_blocks());
  for (std::size_t k = 0; k < table.num_blocks(); ++k) {
    seen[k].assign(table.block(k).values.size(), 0);
  }
  std::map<int, std::size_t> block_of;
  std::vector<std::map<SiteId, std::size_t>> slot_of(table.num_blocks());
  for (std::size_t k = 0; k < table.num_blocks(); ++k) {
    block_of[table.block(k).level] = k;
    for (std::size_t s = 0; s < table.block(k).sites.size(); ++s) {
      slot_of[k][table.block(k).sites[s]] = s;
    }
  }
  int dim = 0;
  int side = 0;
  std::string desc;
  std::string line;
  std::size_t lineno = 0;
  auto fail = [&lineno](const std::string& what) {
    throw std::runtime_error("coefficient file line " + std::to_string(lineno) + ": " + what);
  };
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) {
      continue;
    }
    if (line[0] == '#') {
      std::istringstream hs{line.substr(1)};
      std::string key;
      hs >> key;
      if (key == "basis:") {
        desc += line.substr(std::min(line.size(), std::size_t{9})) + '\n';
        continue;
      }
      std::string eq;
      std::string value;
      if (hs >> eq >> value && eq == "=") {
        if (key == "dim") {
          dim = std::stoi(value);
        } else if (key == "side") {
          side = std::stoi(value);
        } else if (key == "seed") {
          table.seed = std::stoull(value);
        } else if (key == "samples") {
          table.sample_count = std::stoll(value);
        }
      }
      continue;
    }
    if (dim != lattice.dim() || side != lattice.side()) {
      fail("lattice header missing or does not match");
    }
    std::istringstream rs{line};
    int level = 0;
    Coords c{0, 0, 0};
    std::size_t term = 0;
    std::string value_text;
    int jet = 0;
    rs >> level;
    for (int d = 0; d < dim; ++d) {
      rs >> c[d];
    }
    if (!(rs >> term >> value_text >> jet) || (jet != 0 && jet != 1)) {
      fail("malformed row");
    }
    std::string extra;
    if (rs >> extra) {
      fail("trailing fields");
    }
    double value = 0.0;
    try {
      std::size_t used = 0;
      value = std::stod(value_text, &used);
      if (used != value_text.size()) {
        fail("malformed value");
      }
    } catch (const std::logic_error&) {
      fail("malformed value");
    }
    if (!std::isfinite(value)) {
      fail("non-finite coefficient");
    }
    const auto bit = block_of.find(level);
    if (bit == block_of.end()) {
      fail("unknown level " + std::to_string(level));
    }
    auto& block = table.block(bit->second);
    const auto sit = slot_of[bit->second].find(lattice.index(c));
    if (sit == slot_of[bit->second].end()) {
      fail("site is not a stencil site of level " + std::to_string(level));
    }
    const std::size_t slot = sit->second;
    const std::size_t pos = block.offsets[slot] + term;
    if (pos >= block.offsets[slot + 1]) {
      fail("term index out of range");
    }
    if (seen[bit->second][pos] != 0) {
      fail("duplicate coefficient");
    }
    seen[bit->second][pos] = 1;
    block.values[pos] = value;
    block.jettisoned[slot] = static_cast<std::uint8_t>(jet);
  }
  for (const auto& s : seen) {
    if (std::find(s.begin(), s.end(), std::uint8_t{0}) != s.end()) {
      throw std::runtime_error("coefficient file: missing coefficients");
    }
  }
  table.basis_description = desc;
  return table;
}

}  // namespace chainless
