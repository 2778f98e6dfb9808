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

#include <vector>

#include "gtpar/csr_graph.hpp"
#include "gtpar/dense.hpp"

namespace gtpar {

// Contiguous node ranges, one per worker. The first N mod p parts hold one
// extra node.
class PartitionPlan {
 public:
  PartitionPlan() = default;
  explicit PartitionPlan(std::vector<Index> boundaries);

  Index num_nodes() const { return boundaries_.empty() ? 0 : boundaries_.back(); }
  int num_parts() const { return static_cast<int>(boundaries_.size()) - 1; }
  Index begin(int part) const { return boundaries_[static_cast<std::size_t>(part)]; }
  Index end(int part) const { return boundaries_[static_cast<std::size_t>(part) + 1]; }
  Index size(int part) const { return end(part) - begin(part); }
  int owner(Index node) const;
  const std::vector<Index>& boundaries() const { return boundaries_; }

  friend bool operator==(const PartitionPlan&, const PartitionPlan&) = default;

 private:
  std::vector<Index> boundaries_;
};

// Throws ArgumentError unless 1 <= p <= n.
PartitionPlan plan_partition(Index n, int p);

struct HeadRange {
  Index begin = 0;
  Index count = 0;
};

// Heads owned by `rank` once attention is re-sharded by head. Throws
// ConfigError unless heads is divisible by p.
HeadRange heads_for_rank(Index heads, int p, int rank);

// A worker's view under all-gather graph parallelism: its block of rows, with
// columns still indexed over all N nodes, and the matching feature rows.
struct ShardGpAg {
  int rank = 0;
  PartitionPlan plan;
  CsrGraph graph;
  Matrix features;

  Index row_begin() const { return plan.begin(rank); }
  Index row_end() const { return plan.end(rank); }
  // Row count plus nonzero count of the stored block.
  Index graph_storage_elems() const { return graph.num_rows() + graph.num_edges(); }
};

// A worker's view under all-to-all graph parallelism: a full replica of the
// graph plus its own feature rows.
struct ShardGpA2a {
  int rank = 0;
  PartitionPlan plan;
  CsrGraph graph;
  Matrix features;

  Index row_begin() const { return plan.begin(rank); }
  Index row_end() const { return plan.end(rank); }
  Index graph_storage_elems() const { return graph.num_rows() + graph.num_edges(); }
  HeadRange heads(Index total_heads) const {
    return heads_for_rank(total_heads, plan.num_parts(), rank);
  }
};

ShardGpAg shard_gp_ag(const CsrGraph& g, const Matrix& x, const PartitionPlan& plan, int rank);
ShardGpA2a shard_gp_a2a(const CsrGraph& g, const Matrix& x, const PartitionPlan& plan, int rank);

// Row block [begin, end) of g, keeping the full column space.
CsrGraph row_block(const CsrGraph& g, Index begin, Index end);

}  // namespace gtpar
