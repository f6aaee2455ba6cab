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

#include "chainless/model.hpp"

#include <iomanip>
#include <istream>
#include <ostream>
#include <random>
#include <sstream>
#include <utility>

#include "chainless/rng.hpp"

namespace chainless {

std::string to_string(ModelKind kind) { return kind == ModelKind::kIsing ? "ising" : "ea"; }

ModelKind parse_model_kind(const std::string& text) {
  if (text == "ising") {
    return ModelKind::kIsing;
  }
  if (text == "ea" || text == "edwards-anderson") {
    return ModelKind::kEdwardsAnderson;
  }
  throw std::invalid_argument("unknown model kind '" + text + "'");
}

SpinConfiguration SpinConfiguration::flipped() const {
  SpinConfiguration out = *this;
  for (auto& v : out.values_) {
    v = static_cast<std::int8_t>(-v);
  }
  return out;
}

CouplingField::CouplingField(Lattice lattice, double beta, std::vector<double> unit_bonds, double field)
    : lattice_{std::move(lattice)}, beta_{beta}, field_{field}, unit_{std::move(unit_bonds)} {
  const int dim = lattice_.dim();
  if (unit_.size() != static_cast<std::size_t>(lattice_.size()) * dim) {
    throw SizeMismatch("coupling field needs dim * N^dim bonds");
  }
  bonds_.resize(unit_.size());
  for (std::size_t k = 0; k < unit_.size(); ++k) {
    bonds_[k] = beta_ * unit_[k];
  }
  incident_.resize(static_cast<std::size_t>(lattice_.size()) * 2 * dim);
  for (SiteId s = 0; s < lattice_.size(); ++s) {
    const auto nbrs = lattice_.neighbors(s);
    for (int axis = 0; axis < dim; ++axis) {
      incident_[static_cast<std::size_t>(s) * 2 * dim + 2 * axis] = bond(s, axis);
      incident_[static_cast<std::size_t>(s) * 2 * dim + 2 * axis + 1] = bond(nbrs[2 * axis + 1], axis);
    }
  }
}

CouplingField CouplingField::uniform(const Lattice& lattice, double beta, double j0) {
  return CouplingField{lattice, beta, std::vector<double>(static_cast<std::size_t>(lattice.size()) * lattice.dim(), j0)};
}

CouplingField CouplingField::with_beta(double beta) const {
  CouplingField out{lattice_, beta, unit_, beta_ != 0.0 ? field_ / beta_ * beta : 0.0};
  out.seed = seed;
  return out;
}

CouplingField CouplingField::with_field(double field) const {
  CouplingField out{lattice_, beta_, unit_, field};
  out.seed = seed;
  return out;
}

namespace {

void check_size(const SpinConfiguration& spins, const CouplingField& couplings) {
  if (spins.size() != couplings.lattice().size()) {
    throw SizeMismatch("configuration has " + std::to_string(spins.size()) + " spins, lattice has " +
                       std::to_string(couplings.lattice().size()));
  }
}

}  // namespace

double log_density_unnormalized(const SpinConfiguration& spins, const CouplingField& couplings) {
  check_size(spins, couplings);
  const Lattice& lat = couplings.lattice();
  double w = 0.0;
  double magnet = 0.0;
  for (SiteId s = 0; s < lat.size(); ++s) {
    double forward = 0.0;
    for (int axis = 0; axis < lat.dim(); ++axis) {
      forward += couplings.bond(s, axis) * spins[lat.forward(s, axis)];
    }
    w += spins[s] * forward;
    magnet += spins[s];
  }
  return w + couplings.field() * magnet;
}

double site_derivative(const SpinConfiguration& spins, const CouplingField& couplings, SiteId site) {
  check_size(spins, couplings);
  return local_field(spins.values(), couplings, site);
}

CouplingField draw_disorder(std::uint64_t seed, const Lattice& lattice, double beta) {
  auto rng = make_stream(seed, StreamDomain::kDisorder, 0);
  std::normal_distribution<double> normal{0.0, 1.0};
  std::vector<double> xi(static_cast<std::size_t>(lattice.size()) * lattice.dim());
  for (auto& x : xi) {
    x = normal(rng);
  }
  CouplingField out{lattice, beta, std::move(xi)};
  out.seed = seed;
  return out;
}

void write_disorder(std::ostream& os, const CouplingField& couplings) {
  const Lattice& lat = couplings.lattice();
  os << "# chainless disorder v1\n";
  os << "# seed = " << (couplings.seed ? std::to_string(*couplings.seed) : std::string{"none"}) << '\n';
  os << "# dim = " << lat.dim() << '\n';
  os << "# side = " << lat.side() << '\n';
  os << "# temperature = " << std::setprecision(17) << 1.0 / couplings.beta() << '\n';
  for (SiteId s = 0; s < lat.size(); ++s) {
    const Coords c = lat.coords(s);
    for (int axis = 0; axis < lat.dim(); ++axis) {
      for (int k = 0; k < lat.dim(); ++k) {
        os << c[k] << ' ';
      }
      os << axis << ' ' << std::setprecision(17) << couplings.unit_bond(s, axis) << '\n';
    }
  }
}

CouplingField read_disorder(std::istream& is) {
  std::optional<std::uint64_t> seed;
  int dim = 0;
  int side = 0;
  double temperature = 0.0;
  std::string line;
  std::vector<std::string> body;
  while (std::getline(is, line)) {
    if (line.empty()) {
      continue;
    }
    if (line[0] == '#') {
      std::istringstream hs{line.substr(1)};
      std::string key;
      std::string eq;
      std::string value;
      if (hs >> key >> eq >> value && eq == "=") {
        if (key == "seed" && value != "none") {
          seed = std::stoull(value);
        } else if (key == "dim") {
          dim = std::stoi(value);
        } else if (key == "side") {
          side = std::stoi(value);
        } else if (key == "temperature") {
          temperature = std::stod(value);
        }
      }
      continue;
    }
    body.push_back(line);
  }
  if (dim == 0 || side == 0 || temperature <= 0.0) {
    throw std::runtime_error("disorder file: missing dim/side/temperature header");
  }
  Lattice lat{dim, side};
  std::vector<double> unit(static_cast<std::size_t>(lat.size()) * dim, 0.0);
  std::vector<bool> seen(unit.size(), false);
  for (const auto& row : body) {
    std::istringstream rs{row};
    Coords c{0, 0, 0};
    for (int k = 0; k < dim; ++k) {
      rs >> c[k];
    }
    int axis = -1;
    double xi = 0.0;
    if (!(rs >> axis >> xi) || axis < 0 || axis >= dim) {
      throw std::runtime_error("disorder file: malformed bond line '" + row + "'");
    }
    const auto k = static_cast<std::size_t>(lat.index(c)) * dim + axis;
    unit[k] = xi;
    seen[k] = true;
  }
  for (bool b : seen) {
    if (!b) {
      throw std::runtime_error("disorder file: missing bonds");
    }
  }
  CouplingField out{lat, 1.0 / temperature, std::move(unit)};
  out.seed = seed;
  return out;
}

}  // namespace chainless
