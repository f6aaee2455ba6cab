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

/*
 * Sampler and projection throughput on 2D Ising lattices.
 */

#include <benchmark/benchmark.h>

#include "chainless/marginal.hpp"
#include "chainless/sampler.hpp"

namespace chainless {
namespace {

static void BM_DrawSample(benchmark::State& state) {
  const auto side = static_cast<int>(state.range(0));
  const auto h = build_hierarchy_2d(side);
  const auto c = CouplingField::uniform(h.lattice(), 1.0 / 2.2);
  const auto bases = sampling_bases(h);
  const ChainlessSampler sampler{h, c, CoefficientTable{bases, 0.2}, true};
  Rng rng{1};
  for (auto _ : state) {
    benchmark::DoNotOptimize(sampler.draw(rng));
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_DrawSample)->Arg(16)->Arg(32)->Arg(64);

static void BM_AccumulateProjection(benchmark::State& state) {
  const auto side = static_cast<int>(state.range(0));
  const auto h = build_hierarchy_2d(side);
  const auto c = CouplingField::uniform(h.lattice(), 1.0 / 2.2);
  const auto bases = sampling_bases(h);
  const ChainlessSampler sampler{h, c, CoefficientTable{bases, 0.2}, true};
  std::vector<SpinConfiguration> samples;
  for (const auto& s : draw_samples(sampler, 1, StreamDomain::kTest, 0, 0, 256)) {
    samples.push_back(s.spins);
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(accumulate_projection(samples, bases, c));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(samples.size()));
}
BENCHMARK(BM_AccumulateProjection)->Arg(16)->Arg(32);

// Base level: 2^16 states enumerated once per sampler construction.
static void BM_BuildSampler(benchmark::State& state) {
  const auto h = build_hierarchy_2d(16);
  const auto c = CouplingField::uniform(h.lattice(), 1.0 / 2.2);
  const auto bases = sampling_bases(h);
  const CoefficientTable table{bases, 0.2};
  for (auto _ : state) {
    benchmark::DoNotOptimize(ChainlessSampler{h, c, table, true});
  }
}
BENCHMARK(BM_BuildSampler);

}  // namespace
}  // namespace chainless

BENCHMARK_MAIN();
