// Copyright 2026 The gtpar Authors. All Rights Reserved.
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

#include <benchmark/benchmark.h>

#include "gtpar/graph_gen.hpp"
#include "gtpar/random.hpp"
#include "gtpar/strategies.hpp"

namespace gtpar {
namespace {

constexpr Index kHidden = 32;
constexpr Index kHeads = 4;

Matrix random_matrix(Rng& rng, Index rows, Index cols) {
  Matrix m(rows, cols);
  for (double& v : m.values()) v = rng.uniform(-0.5, 0.5);
  return m;
}

// One forward and backward of an attention block on simulated workers.
// Args: strategy (0 single, 1 GP-AG, 2 GP-A2A), workers.
void BM_Strategy(benchmark::State& state) {
  const auto kind = static_cast<StrategyKind>(state.range(0));
  const int p = static_cast<int>(state.range(1));
  const CsrGraph g = generate_power_law(4000, 10, 5);
  Rng rng(5);
  const Matrix x = random_matrix(rng, g.num_nodes(), kHidden);
  const SgaWeights w{random_matrix(rng, kHidden, kHidden), random_matrix(rng, kHidden, kHidden),
                     random_matrix(rng, kHidden, kHidden), random_matrix(rng, kHidden, kHidden)};
  const Matrix grad = random_matrix(rng, g.num_nodes(), kHidden);
  std::int64_t moved = 0;
  for (auto _ : state) {
    const DistributedResult r = run_distributed(kind, g, x, w, kHeads, p, grad);
    moved = r.ledger.received(0, {Primitive::kAllGather, Primitive::kReduceScatter, Primitive::kAllToAll});
    benchmark::DoNotOptimize(r.output);
  }
  state.SetLabel(std::string(strategy_name(kind)));
  state.counters["rank0_elements"] = static_cast<double>(moved);
}

BENCHMARK(BM_Strategy)
    ->Args({0, 1})
    ->Args({1, 2})
    ->Args({1, 4})
    ->Args({2, 2})
    ->Args({2, 4})
    ->UseRealTime()
    ->Unit(benchmark::kMillisecond);

}  // namespace
}  // namespace gtpar

BENCHMARK_MAIN();
