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

#pragma once

#include <iosfwd>
#include <span>
#include <string_view>
#include <vector>

#include "gtpar/collectives.hpp"
#include "gtpar/kernel_census.hpp"
#include "gtpar/partition.hpp"
#include "gtpar/sga.hpp"

namespace gtpar {

enum class StrategyKind { kSingleWorker = 0, kGpAg, kGpA2a };

std::string_view strategy_name(StrategyKind kind);
// Accepts "single", "gp-ag", "gp-a2a". Throws ArgumentError otherwise.
StrategyKind parse_strategy(std::string_view name);

// Per-rank state kept between a distributed forward and its backward.
//   GP-AG:  q is the rank's own rows, k and v are the gathered full-graph
//           operands, graph is the rank's row block.
//   GP-A2A: q, k, v cover all N nodes for the rank's head slice, graph is
//           the full replica.
struct DistSgaCache {
  StrategyKind kind = StrategyKind::kSingleWorker;
  PartitionPlan plan;
  int rank = -1;
  const CsrGraph* graph = nullptr;
  SgaWeights weights;
  Index heads = 0;
  HeadRange head_range;
  Matrix x;
  HeadedMatrix<double> q;
  HeadedMatrix<double> k;
  HeadedMatrix<double> v;
  EdgeValues<double> u;

  bool valid() const { return graph != nullptr; }
  // Dense elements saved for the backward pass (block input excluded).
  Index saved_dense_elems() const { return q.size() + k.size() + v.size(); }
  // Edge elements saved for the backward pass.
  Index saved_edge_elems() const { return u.size(); }
};

struct DistForward {
  Matrix y_local;
  DistSgaCache cache;
};

// Weight gradients are summed over ranks (identical everywhere); `x` holds
// the gradient for the rank's own rows.
DistForward gp_ag_forward(WorkerGroup& group, int rank, const ShardGpAg& shard,
                          const SgaWeights& weights, Index heads);
SgaGradients gp_ag_backward(WorkerGroup& group, int rank, const Matrix& grad_local,
                            DistSgaCache&& cache);

DistForward gp_a2a_forward(WorkerGroup& group, int rank, const ShardGpA2a& shard,
                           const SgaWeights& weights, Index heads);
SgaGradients gp_a2a_backward(WorkerGroup& group, int rank, const Matrix& grad_local,
                             DistSgaCache&& cache);

// Sums per-rank weight gradients over the group in one all-reduce.
void all_reduce_weight_gradients(WorkerGroup& group, int rank, SgaGradients& grads);

struct MemoryReport {
  int rank = 0;
  StrategyKind strategy = StrategyKind::kSingleWorker;
  Index dense_activation_elems = 0;
  Index edge_activation_elems = 0;
  Index graph_storage_elems = 0;
};

// CSV: rank,strategy,dense_activation_elems,edge_activation_elems,graph_storage_elems
void write_memory_report(std::ostream& os, std::span<const MemoryReport> reports);

struct DistributedResult {
  Matrix output;
  SgaGradients gradients;
  CommLedger ledger;
  std::vector<MemoryReport> memory;
  std::vector<KernelCounts> forward_kernels;
  std::vector<KernelCounts> backward_kernels;
};

// Partitions the inputs, runs one forward and one backward (with cotangent
// grad_out) of an attention block on p simulated workers and reassembles
// full-graph results.
DistributedResult run_distributed(StrategyKind kind, const CsrGraph& g, const Matrix& x,
                                  const SgaWeights& weights, Index heads, int p,
                                  const Matrix& grad_out);

// Checks strategy-specific constraints before any worker starts.
void check_strategy_config(StrategyKind kind, Index nodes, Index heads, int p);

}  // namespace gtpar
