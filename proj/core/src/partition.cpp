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

#include "gtpar/partition.hpp"

#include <algorithm>
#include <string>

namespace gtpar {

PartitionPlan::PartitionPlan(std::vector<Index> boundaries) : boundaries_(std::move(boundaries)) {
  if (boundaries_.size() < 2 || boundaries_.front() != 0) {
    throw ArgumentError("partition: boundaries must start at 0 and name at least one part");
  }
  if (!std::is_sorted(boundaries_.begin(), boundaries_.end())) {
    throw ArgumentError("partition: boundaries must be nondecreasing");
  }
}

int PartitionPlan::owner(Index node) const {
  if (node < 0 || node >= num_nodes()) throw ArgumentError("partition: node out of range");
  auto it = std::upper_bound(boundaries_.begin(), boundaries_.end(), node);
  return static_cast<int>(it - boundaries_.begin()) - 1;
}

PartitionPlan plan_partition(Index n, int p) {
  if (p <= 0 || p > n) {
    throw ArgumentError("partition: need 1 <= p <= n, got p=" + std::to_string(p) +
                        " n=" + std::to_string(n));
  }
  std::vector<Index> b(static_cast<std::size_t>(p) + 1, 0);
  const Index base = n / p;
  const Index extra = n % p;
  for (int r = 0; r < p; ++r) {
    b[static_cast<std::size_t>(r) + 1] = b[static_cast<std::size_t>(r)] + base + (r < extra ? 1 : 0);
  }
  return PartitionPlan(std::move(b));
}

HeadRange heads_for_rank(Index heads, int p, int rank) {
  if (p <= 0 || heads % p != 0) {
    throw ConfigError("h not divisible by p (h=" + std::to_string(heads) +
                      ", p=" + std::to_string(p) + ")");
  }
  if (rank < 0 || rank >= p) throw ArgumentError("rank out of range");
  const Index per = heads / p;
  return {per * rank, per};
}

CsrGraph row_block(const CsrGraph& g, Index begin, Index end) {
  if (begin < 0 || end < begin || end > g.num_rows()) throw ArgumentError("row_block out of range");
  const Index base = g.row_begin(begin);
  std::vector<Index> row_ptr;
  row_ptr.reserve(static_cast<std::size_t>(end - begin) + 1);
  for (Index r = begin; r <= end; ++r) row_ptr.push_back(g.row_ptr()[static_cast<std::size_t>(r)] - base);
  auto cols = g.col_idx();
  std::vector<Index> col_idx(cols.begin() + base, cols.begin() + g.row_begin(end));
  return CsrGraph(end - begin, g.num_cols(), std::move(row_ptr), std::move(col_idx));
}

namespace {

void check_shard_args(const CsrGraph& g, const Matrix& x, const PartitionPlan& plan, int rank) {
  if (rank < 0 || rank >= plan.num_parts()) {
    throw ArgumentError("shard: rank " + std::to_string(rank) + " out of range for " +
                        std::to_string(plan.num_parts()) + " parts");
  }
  if (plan.num_nodes() != g.num_rows() || x.rows() != g.num_rows()) {
    throw ShapeError("shard: plan, graph and features disagree on node count");
  }
}

}  // namespace

ShardGpAg shard_gp_ag(const CsrGraph& g, const Matrix& x, const PartitionPlan& plan, int rank) {
  check_shard_args(g, x, plan, rank);
  ShardGpAg shard;
  shard.rank = rank;
  shard.plan = plan;
  shard.graph = row_block(g, plan.begin(rank), plan.end(rank));
  shard.features = slice_rows(x, plan.begin(rank), plan.end(rank));
  return shard;
}

ShardGpA2a shard_gp_a2a(const CsrGraph& g, const Matrix& x, const PartitionPlan& plan, int rank) {
  check_shard_args(g, x, plan, rank);
  ShardGpA2a shard;
  shard.rank = rank;
  shard.plan = plan;
  shard.graph = g;
  shard.features = slice_rows(x, plan.begin(rank), plan.end(rank));
  return shard;
}

}  // namespace gtpar
