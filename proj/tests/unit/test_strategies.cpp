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

#include <gtest/gtest.h>

#include <sstream>

#include "gtpar/strategies.hpp"
#include "oracles.hpp"

namespace gtpar {
namespace {

using testing::max_rel_diff;
using testing::random_graph;
using testing::random_matrix;
using testing::random_weights;

struct Instance {
  CsrGraph g;
  Matrix x;
  SgaWeights w;
  Matrix grad;
};

Instance make_instance(Rng& rng, Index n, Index d, double degree) {
  Instance in;
  in.g = random_graph(rng, n, degree);
  in.x = random_matrix(rng, n, d);
  in.w = random_weights(rng, d);
  in.grad = random_matrix(rng, n, d);
  return in;
}

double gradient_diff(const SgaGradients& a, const SgaGradients& b) {
  return std::max({max_rel_diff(a.x, b.x), max_rel_diff(a.w_q, b.w_q), max_rel_diff(a.w_k, b.w_k),
                   max_rel_diff(a.w_v, b.w_v), max_rel_diff(a.w_o, b.w_o)});
}

TEST(ParseStrategy, Names) {
  EXPECT_EQ(parse_strategy("gp-ag"), StrategyKind::kGpAg);
  EXPECT_EQ(parse_strategy("gp-a2a"), StrategyKind::kGpA2a);
  EXPECT_EQ(parse_strategy("single"), StrategyKind::kSingleWorker);
  EXPECT_THROW(parse_strategy("auto"), ArgumentError);
}

TEST(GpAg, MatchesSingleWorkerAndOracle) {
  Rng rng(61);
  for (int p : {2, 3, 4}) {
    for (int trial = 0; trial < 5; ++trial) {
      const Instance in = make_instance(rng, 12, 8, 3.0);
      const auto single = run_distributed(StrategyKind::kSingleWorker, in.g, in.x, in.w, 2, 1, in.grad);
      const auto dist = run_distributed(StrategyKind::kGpAg, in.g, in.x, in.w, 2, p, in.grad);
      EXPECT_LT(max_rel_diff(dist.output, sga_oracle(in.x, in.g, in.w, 2)), 1e-10);
      EXPECT_LT(max_rel_diff(dist.output, single.output), 1e-9);
      EXPECT_LT(gradient_diff(dist.gradients, single.gradients), 1e-9);
    }
  }
}

TEST(GpA2a, MatchesSingleWorkerAndOracle) {
  Rng rng(62);
  for (int p : {2, 4}) {
    for (int trial = 0; trial < 5; ++trial) {
      const Instance in = make_instance(rng, 12, 8, 3.0);
      const auto single = run_distributed(StrategyKind::kSingleWorker, in.g, in.x, in.w, 4, 1, in.grad);
      const auto dist = run_distributed(StrategyKind::kGpA2a, in.g, in.x, in.w, 4, p, in.grad);
      EXPECT_LT(max_rel_diff(dist.output, sga_oracle(in.x, in.g, in.w, 4)), 1e-10);
      EXPECT_LT(max_rel_diff(dist.output, single.output), 1e-9);
      EXPECT_LT(gradient_diff(dist.gradients, single.gradients), 1e-9);
    }
  }
}

TEST(Strategies, SingleRankGroupsCommunicateNothing) {
  Rng rng(63);
  const Instance in = make_instance(rng, 9, 4, 2.0);
  const auto single = run_distributed(StrategyKind::kSingleWorker, in.g, in.x, in.w, 2, 1, in.grad);
  for (StrategyKind k : {StrategyKind::kGpAg, StrategyKind::kGpA2a}) {
    const auto r = run_distributed(k, in.g, in.x, in.w, 2, 1, in.grad);
    EXPECT_TRUE(r.ledger.all_zero());
    EXPECT_EQ(r.output, single.output);
    EXPECT_EQ(r.gradients.w_q, single.gradients.w_q);
    EXPECT_EQ(r.gradients.x, single.gradients.x);
  }
  EXPECT_TRUE(single.ledger.all_zero());
}

TEST(GpAg, CensusAndVolume) {
  Rng rng(64);
  const Index n = 12;
  const Index d = 8;
  for (int p : {2, 3, 4}) {
    const Instance in = make_instance(rng, n, d, 3.0);
    const auto r = run_distributed(StrategyKind::kGpAg, in.g, in.x, in.w, 2, p, in.grad);
    for (int rank = 0; rank < p; ++rank) {
      EXPECT_EQ(r.ledger.at(rank, Primitive::kAllGather).calls, 2);
      EXPECT_EQ(r.ledger.at(rank, Primitive::kReduceScatter).calls, 2);
      EXPECT_EQ(r.ledger.at(rank, Primitive::kAllToAll).calls, 0);
      const auto expected = 4 * n * d * (p - 1) / p;
      EXPECT_EQ(r.ledger.received(rank, {Primitive::kAllGather, Primitive::kReduceScatter}), expected);
      EXPECT_EQ(r.ledger.sent(rank, {Primitive::kAllGather, Primitive::kReduceScatter}), expected);
      EXPECT_EQ(r.ledger.at(rank, Primitive::kAllGather).elements_received, 2 * n * d * (p - 1) / p);
    }
  }
}

TEST(GpA2a, CensusAndVolume) {
  Rng rng(65);
  const Index n = 16;
  const Index d = 8;
  for (int p : {2, 4}) {
    const Instance in = make_instance(rng, n, d, 3.0);
    const auto r = run_distributed(StrategyKind::kGpA2a, in.g, in.x, in.w, 4, p, in.grad);
    for (int rank = 0; rank < p; ++rank) {
      EXPECT_EQ(r.ledger.at(rank, Primitive::kAllToAll).calls, 8);
      EXPECT_EQ(r.ledger.at(rank, Primitive::kAllGather).calls, 0);
      EXPECT_EQ(r.ledger.at(rank, Primitive::kReduceScatter).calls, 0);
      const auto expected = 8 * n * d * (p - 1) / (p * p);
      EXPECT_EQ(r.ledger.at(rank, Primitive::kAllToAll).elements_received, expected);
      EXPECT_EQ(r.ledger.at(rank, Primitive::kAllToAll).elements_sent, expected);
    }
  }
}

TEST(Strategies, KernelCensusPerRank) {
  Rng rng(66);
  const Instance in = make_instance(rng, 12, 8, 3.0);
  for (StrategyKind k : {StrategyKind::kGpAg, StrategyKind::kGpA2a}) {
    const auto r = run_distributed(k, in.g, in.x, in.w, 4, 2, in.grad);
    for (int rank = 0; rank < 2; ++rank) {
      EXPECT_EQ(r.forward_kernels[static_cast<std::size_t>(rank)], (KernelCounts{4, 1, 1}));
      EXPECT_EQ(r.backward_kernels[static_cast<std::size_t>(rank)].spmm, 3);
      EXPECT_EQ(r.backward_kernels[static_cast<std::size_t>(rank)].sddmm, 1);
    }
  }
}

TEST(GpA2a, EachRankAttendsOverAllNodesForItsHeads) {
  Rng rng(67);
  const Instance in = make_instance(rng, 12, 8, 3.0);
  const int p = 2;
  const Index heads = 4;
  const PartitionPlan plan = plan_partition(12, p);
  WorkerGroup group(p);
  run_workers(group, [&](int rank) {
    const ShardGpA2a shard = shard_gp_a2a(in.g, in.x, plan, rank);
    DistForward fwd = gp_a2a_forward(group, rank, shard, in.w, heads);
    EXPECT_EQ(fwd.cache.q.rows(), 12);
    EXPECT_EQ(fwd.cache.q.heads(), heads / p);
    EXPECT_EQ(fwd.cache.u.heads(), heads / p);
    EXPECT_EQ(fwd.cache.u.num_edges(), in.g.num_edges());
    EXPECT_EQ(fwd.cache.head_range.begin, rank * heads / p);
    gp_a2a_backward(group, rank, slice_rows(in.grad, plan.begin(rank), plan.end(rank)),
                    std::move(fwd.cache));
  });
}

TEST(Strategies, ZeroCotangentStillCommunicates) {
  Rng rng(68);
  Instance in = make_instance(rng, 8, 4, 2.0);
  in.grad = Matrix(8, 4);
  for (StrategyKind k : {StrategyKind::kGpAg, StrategyKind::kGpA2a}) {
    const auto r = run_distributed(k, in.g, in.x, in.w, 2, 2, in.grad);
    for (const Matrix* m : {&r.gradients.x, &r.gradients.w_q, &r.gradients.w_k, &r.gradients.w_v,
                            &r.gradients.w_o}) {
      EXPECT_EQ(*m, Matrix(m->rows(), m->cols()));
    }
    if (k == StrategyKind::kGpAg) {
      EXPECT_EQ(r.ledger.at(0, Primitive::kReduceScatter).calls, 2);
    } else {
      EXPECT_EQ(r.ledger.at(0, Primitive::kAllToAll).calls, 8);
    }
  }
}

TEST(GpA2a, HeadsNotDivisibleIsConfigError) {
  Rng rng(69);
  const Instance in = make_instance(rng, 8, 6, 2.0);
  try {
    run_distributed(StrategyKind::kGpA2a, in.g, in.x, in.w, 3, 2, in.grad);
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("h not divisible by p"), std::string::npos);
  }
}

TEST(Strategies, RepeatedRunsAreBitIdentical) {
  Rng rng(70);
  const Instance in = make_instance(rng, 14, 8, 4.0);
  for (StrategyKind k : {StrategyKind::kGpAg, StrategyKind::kGpA2a}) {
    const auto a = run_distributed(k, in.g, in.x, in.w, 4, 2, in.grad);
    const auto b = run_distributed(k, in.g, in.x, in.w, 4, 2, in.grad);
    EXPECT_EQ(a.output, b.output);
    EXPECT_EQ(a.gradients.x, b.gradients.x);
    EXPECT_EQ(a.gradients.w_k, b.gradients.w_k);
    EXPECT_EQ(a.ledger, b.ledger);
  }
}

TEST(Strategies, BackwardRejectsMismatchedCache) {
  Rng rng(71);
  const Instance in = make_instance(rng, 8, 4, 2.0);
  const PartitionPlan plan = plan_partition(8, 2);
  WorkerGroup group(2);
  EXPECT_THROW(run_workers(group,
                           [&](int rank) {
                             const ShardGpAg shard = shard_gp_ag(in.g, in.x, plan, rank);
                             DistForward fwd = gp_ag_forward(group, rank, shard, in.w, 2);
                             gp_a2a_backward(group, rank, Matrix(4, 4), std::move(fwd.cache));
                           }),
               StateError);
  WorkerGroup group2(2);
  EXPECT_THROW(run_workers(group2,
                           [&](int rank) {
                             const ShardGpAg shard = shard_gp_ag(in.g, in.x, plan, rank);
                             DistForward fwd = gp_ag_forward(group2, rank, shard, in.w, 2);
                             DistSgaCache cache = std::move(fwd.cache);
                             gp_ag_backward(group2, rank, Matrix(4, 4), std::move(cache));
                             gp_ag_backward(group2, rank, Matrix(4, 4), std::move(cache));
                           }),
               StateError);
}

TEST(Strategies, MemoryReportMatchesStorageAndActivationModel) {
  Rng rng(72);
  const Index n = 16;
  const Index d = 8;
  const Index h = 4;
  const int p = 4;
  const Instance in = make_instance(rng, n, d, 4.0);
  const PartitionPlan plan = plan_partition(n, p);
  const auto ag = run_distributed(StrategyKind::kGpAg, in.g, in.x, in.w, h, p, in.grad);
  const auto a2a = run_distributed(StrategyKind::kGpA2a, in.g, in.x, in.w, h, p, in.grad);
  for (int r = 0; r < p; ++r) {
    const auto& ma = ag.memory[static_cast<std::size_t>(r)];
    const Index er = in.g.row_begin(plan.end(r)) - in.g.row_begin(plan.begin(r));
    EXPECT_EQ(ma.graph_storage_elems, n / p + er);
    EXPECT_EQ(ma.edge_activation_elems, er * h);
    EXPECT_EQ(ma.dense_activation_elems, n * d / p + 2 * n * d);
    const auto& mb = a2a.memory[static_cast<std::size_t>(r)];
    EXPECT_EQ(mb.graph_storage_elems, n + in.g.num_edges());
    EXPECT_EQ(mb.edge_activation_elems, in.g.num_edges() * h / p);
    EXPECT_EQ(mb.dense_activation_elems, 3 * n * d / p);
  }
  std::ostringstream os;
  write_memory_report(os, ag.memory);
  EXPECT_EQ(os.str().rfind("rank,strategy,dense_activation_elems,edge_activation_elems,graph_storage_elems\n", 0),
            0u);
  EXPECT_NE(os.str().find("\n0,gp-ag,"), std::string::npos);
}

TEST(Strategies, ConfigChecks) {
  EXPECT_THROW(check_strategy_config(StrategyKind::kSingleWorker, 10, 2, 2), ConfigError);
  EXPECT_THROW(check_strategy_config(StrategyKind::kGpAg, 3, 2, 4), ConfigError);
  EXPECT_NO_THROW(check_strategy_config(StrategyKind::kGpAg, 10, 3, 4));
}

}  // namespace
}  // namespace gtpar
