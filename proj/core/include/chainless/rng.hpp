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

#ifndef CHAINLESS_RNG_HPP
#define CHAINLESS_RNG_HPP

#include <cstdint>
#include <random>

namespace chainless {

using Rng = std::mt19937_64;

/// Purpose tag mixed into stream seeds so different pipeline stages never share a stream.
enum class StreamDomain : std::uint64_t {
  kDisorder = 1,
  kBootstrap = 2,
  kEvaluation = 3,
  kMetropolis = 4,
  kTempering = 5,
  kRealization = 6,
  kDiagnostic = 7,
  kTest = 8,
};

/// splitmix64 finalizer.
[[nodiscard]] constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30U)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27U)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31U);
}

/// Seed for stream `index` of `domain`; a pure function of its arguments.
[[nodiscard]] constexpr std::uint64_t derive_seed(std::uint64_t seed, StreamDomain domain, std::uint64_t index,
                                                  std::uint64_t sub = 0) noexcept {
  std::uint64_t h = mix64(seed);
  h = mix64(h ^ static_cast<std::uint64_t>(domain));
  h = mix64(h ^ index);
  return mix64(h ^ sub);
}

/// Independent generator for (seed, domain, index, sub). Sample i of a batch uses
/// index i, so results do not depend on how the batch is split across threads.
[[nodiscard]] inline Rng make_stream(std::uint64_t seed, StreamDomain domain, std::uint64_t index,
                                     std::uint64_t sub = 0) {
  return Rng{derive_seed(seed, domain, index, sub)};
}

[[nodiscard]] inline double uniform01(Rng& rng) {
  return std::uniform_real_distribution<double>{0.0, 1.0}(rng);
}

}  // namespace chainless

#endif  // CHAINLESS_RNG_HPP
