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

#include "gtpar/dense.hpp"
#include "gtpar/graph_gen.hpp"
#include "gtpar/random.hpp"
#include "gtpar/sga.hpp"
#include "gtpar/sparse_ops.hpp"

namespace gtpar {
namespace {

constexpr Index kHidden = 64;
constexpr Index kHeads = 4;

Matrix random_matrix(Rng& rng, Index rows, Index cols) {
  Matrix m(rows, cols);
  for (double& v : m.values()) v = rng.uniform(-1.0, 1.0);
  return m;
}

// Args: nodes, average degree.
void BM_Mm(benchmark::State& state) {
  Rng rng(1);
  const Matrix x = random_matrix(rng, state.range(0), kHidden);
  const Matrix w = random_matrix(rng, kHidden, kHidden);
  for (auto _ : state) benchmark::DoNotOptimize(matmul(x, w));
  state.counters["nodes"] = static_cast<double>(state.range(0));
}

void BM_Spmm(benchmark::State& state) {
  const CsrGraph g = generate_erdos_renyi(state.range(0), static_cast<double>(state.range(1)), 2);
  Rng rng(2);
  const HeadedMatrix<double> v(random_matrix(rng, g.num_nodes(), kHidden), kHeads);
  EdgeValues<double> u(g, kHeads);
  for (double& x : u.values()) x = rng.unit();
  for (auto _ : state) benchmark::DoNotOptimize(spmm(u, v));
  state.counters["edges"] = static_cast<double>(g.num_edges());
}

void BM_Sddmm(benchmark::State& state) {
  const CsrGraph g = generate_erdos_renyi(state.range(0), static_cast<double>(state.range(1)), 3);
  Rng rng(3);
  const HeadedMatrix<double> q(random_matrix(rng, g.num_nodes(), kHidden), kHeads);
  const HeadedMatrix<double> k(random_matrix(rng, g.num_nodes(), kHidden), kHeads);
  for (auto _ : state) benchmark::DoNotOptimize(sddmm(g, q, k));
  state.counters["edges"] = static_cast<double>(g.num_edges());
}

void BM_SgaForwardBackward(benchmark::State& state) {
  const CsrGraph g = generate_erdos_renyi(state.range(0), static_cast<double>(state.range(1)), 4);
  Rng rng(4);
  const Matrix x = random_matrix(rng, g.num_nodes(), kHidden);
  const SgaWeights w{random_matrix(rng, kHidden, kHidden), random_matrix(rng, kHidden, kHidden),
                     random_matrix(rng, kHidden, kHidden), random_matrix(rng, kHidden, kHidden)};
  const Matrix grad = random_matrix(rng, g.num_nodes(), kHidden);
  for (auto _ : state) {
    const SgaForward fwd = sga_forward(x, g, w, kHeads);
    benchmark::DoNotOptimize(sga_backward(grad, fwd.cache));
  }
  state.counters["edges"] = static_cast<double>(g.num_edges());
}

BENCHMARK(BM_Mm)->Args({10000, 0})->Args({20000, 0})->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_Spmm)->Args({10000, 8})->Args({10000, 16})->Args({10000, 32})->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_Sddmm)->Args({10000, 8})->Args({10000, 16})->Args({10000, 32})->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_SgaForwardBackward)->Args({5000, 8})->Args({5000, 16})->Unit(benchmark::kMillisecond);

}  // namespace
}  // namespace gtpar

BENCHMARK_MAIN();
