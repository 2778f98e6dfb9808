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

#include "gtpar/strategies.hpp"

#include <ostream>
#include <string>

namespace gtpar {

std::string_view strategy_name(StrategyKind kind) {
  switch (kind) {
    case StrategyKind::kSingleWorker: return "single";
    case StrategyKind::kGpAg: return "gp-ag";
    case StrategyKind::kGpA2a: return "gp-a2a";
  }
  return "unknown";
}

StrategyKind parse_strategy(std::string_view name) {
  if (name == "single") return StrategyKind::kSingleWorker;
  if (name == "gp-ag") return StrategyKind::kGpAg;
  if (name == "gp-a2a") return StrategyKind::kGpA2a;
  throw ArgumentError("unknown strategy '" + std::string(name) + "'");
}

void check_strategy_config(StrategyKind kind, Index nodes, Index heads, int p) {
  if (p < 1) throw ConfigError("need at least one worker");
  if (kind == StrategyKind::kSingleWorker && p != 1) {
    throw ConfigError("single-worker strategy runs with p=1");
  }
  if (p > nodes) {
    throw ConfigError("more workers (" + std::to_string(p) + ") than nodes (" +
                      std::to_string(nodes) + ")");
  }
  if (kind == StrategyKind::kGpA2a && heads % p != 0) {
    throw ConfigError("h not divisible by p (h=" + std::to_string(heads) +
                      ", p=" + std::to_string(p) + ")");
  }
}

namespace {

HeadedMatrix<double> headed(Matrix&& m, Index heads) { return HeadedMatrix<double>(std::move(m), heads); }

void check_backward(const DistSgaCache& cache, StrategyKind expected, int rank,
                    const Matrix& grad_local) {
  if (!cache.valid()) throw StateError("distributed backward: cache is empty or already used");
  if (cache.kind != expected) {
    throw StateError("distributed backward: cache was produced by " +
                     std::string(strategy_name(cache.kind)) + ", not " +
                     std::string(strategy_name(expected)));
  }
  if (cache.rank != rank) throw StateError("distributed backward: cache belongs to another rank");
  if (grad_local.rows() != cache.x.rows() || grad_local.cols() != cache.x.cols()) {
    throw StateError("distributed backward: gradient shape does not match cached forward");
  }
}

// Per-rank dense gradients given the rank's projection-operand gradients.
SgaGradients local_weight_gradients(const DistSgaCache& c, const Matrix& grad_out, const Matrix& dq,
                                    const Matrix& dk, const Matrix& dv) {
  SgaGradients g;
  g.w_o = matmul_tn(c.x, grad_out);
  g.w_q = matmul_tn(c.x, dq);
  g.w_k = matmul_tn(c.x, dk);
  g.w_v = matmul_tn(c.x, dv);
  g.x = matmul_nt(grad_out, c.weights.w_o);
  add_inplace(g.x, matmul_nt(dq, c.weights.w_q));
  add_inplace(g.x, matmul_nt(dk, c.weights.w_k));
  add_inplace(g.x, matmul_nt(dv, c.weights.w_v));
  return g;
}

// Node-sharded [n_r, h, d'] -> head-sharded [N, h/p, d'].
Matrix to_head_sharded(WorkerGroup& group, int rank, const Matrix& local, Index cols_per_rank) {
  std::vector<Matrix> blocks;
  blocks.reserve(static_cast<std::size_t>(group.size()));
  for (int j = 0; j < group.size(); ++j) {
    blocks.push_back(slice_cols(local, j * cols_per_rank, (j + 1) * cols_per_rank));
  }
  return group.all_to_all(rank, blocks, ConcatAxis::kRows);
}

// Head-sharded [N, h/p, d'] -> node-sharded [n_r, h, d'].
Matrix to_node_sharded(WorkerGroup& group, int rank, const Matrix& full, const PartitionPlan& plan) {
  std::vector<Matrix> blocks;
  blocks.reserve(static_cast<std::size_t>(group.size()));
  for (int j = 0; j < group.size(); ++j) blocks.push_back(slice_rows(full, plan.begin(j), plan.end(j)));
  return group.all_to_all(rank, blocks, ConcatAxis::kCols);
}

}  // namespace

void all_reduce_weight_gradients(WorkerGroup& group, int rank, SgaGradients& grads) {
  const Index d = grads.w_q.rows();
  std::vector<Matrix> parts{grads.w_q, grads.w_k, grads.w_v, grads.w_o};
  Matrix summed = group.all_reduce(rank, concat_rows<double>(parts));
  grads.w_q = slice_rows(summed, 0, d);
  grads.w_k = slice_rows(summed, d, 2 * d);
  grads.w_v = slice_rows(summed, 2 * d, 3 * d);
  grads.w_o = slice_rows(summed, 3 * d, 4 * d);
}

DistForward gp_ag_forward(WorkerGroup& group, int rank, const ShardGpAg& shard,
                          const SgaWeights& weights, Index heads) {
  if (shard.rank != rank || shard.plan.num_parts() != group.size()) {
    throw ConfigError("gp-ag: shard does not belong to this rank/group");
  }
  check_sga_shapes(shard.features, shard.graph, weights, heads);
  const Index d = shard.features.cols();
  const double scale = attention_scale<double>(d);

  DistSgaCache c;
  c.kind = StrategyKind::kGpAg;
  c.plan = shard.plan;
  c.rank = rank;
  c.graph = &shard.graph;
  c.weights = weights;
  c.heads = heads;
  c.head_range = {0, heads};
  c.x = shard.features;

  Matrix k_local = matmul(c.x, weights.w_k);
  Matrix v_local = matmul(c.x, weights.w_v);
  c.q = headed(matmul(c.x, weights.w_q), heads);

  c.k = headed(group.all_gather(rank, k_local), heads);
  EdgeValues<double> z = sddmm(shard.graph, c.q, c.k);
  c.u = edge_softmax(z, scale);
  c.v = headed(group.all_gather(rank, v_local), heads);
  Matrix y = spmm(c.u, c.v).to_dense();

  Matrix out = matmul(c.x, weights.w_o);
  add_inplace(out, y);
  return {std::move(out), std::move(c)};
}

SgaGradients gp_ag_backward(WorkerGroup& group, int rank, const Matrix& grad_local,
                            DistSgaCache&& cache) {
  check_backward(cache, StrategyKind::kGpAg, rank, grad_local);
  DistSgaCache c = std::move(cache);
  cache = DistSgaCache{};
  const double scale = attention_scale<double>(c.x.cols());

  Matrix grad_copy = grad_local;
  AttentionGradients<double> attn =
      attention_backward(*c.graph, c.q, c.k, c.v, c.u, headed(std::move(grad_copy), c.heads), scale);

  // Gathered operands' gradients are summed back to their owners.
  Matrix dv = group.reduce_scatter(rank, std::move(attn.v).to_dense(), c.plan);
  Matrix dk = group.reduce_scatter(rank, std::move(attn.k).to_dense(), c.plan);
  Matrix dq = std::move(attn.q).to_dense();

  SgaGradients grads = local_weight_gradients(c, grad_local, dq, dk, dv);
  all_reduce_weight_gradients(group, rank, grads);
  return grads;
}

DistForward gp_a2a_forward(WorkerGroup& group, int rank, const ShardGpA2a& shard,
                           const SgaWeights& weights, Index heads) {
  if (shard.rank != rank || shard.plan.num_parts() != group.size()) {
    throw ConfigError("gp-a2a: shard does not belong to this rank/group");
  }
  const HeadRange hr = shard.heads(heads);
  const Index d = shard.features.cols();
  if (shard.features.rows() != shard.plan.size(rank)) throw ShapeError("gp-a2a: feature rows");
  {
    // Shape checks against the owned rows only.
    CsrGraph probe = row_block(shard.graph, shard.row_begin(), shard.row_end());
    check_sga_shapes(shard.features, probe, weights, heads);
  }
  const double scale = attention_scale<double>(d);
  const Index cols_per_rank = d / group.size();

  DistSgaCache c;
  c.kind = StrategyKind::kGpA2a;
  c.plan = shard.plan;
  c.rank = rank;
  c.graph = &shard.graph;
  c.weights = weights;
  c.heads = heads;
  c.head_range = hr;
  c.x = shard.features;

  Matrix q_local = matmul(c.x, weights.w_q);
  Matrix k_local = matmul(c.x, weights.w_k);
  Matrix v_local = matmul(c.x, weights.w_v);

  c.q = headed(to_head_sharded(group, rank, q_local, cols_per_rank), hr.count);
  c.k = headed(to_head_sharded(group, rank, k_local, cols_per_rank), hr.count);
  EdgeValues<double> z = sddmm(shard.graph, c.q, c.k);
  c.u = edge_softmax(z, scale);
  c.v = headed(to_head_sharded(group, rank, v_local, cols_per_rank), hr.count);
  Matrix y_heads = spmm(c.u, c.v).to_dense();
  Matrix y = to_node_sharded(group, rank, y_heads, c.plan);

  Matrix out = matmul(c.x, weights.w_o);
  add_inplace(out, y);
  return {std::move(out), std::move(c)};
}

SgaGradients gp_a2a_backward(WorkerGroup& group, int rank, const Matrix& grad_local,
                             DistSgaCache&& cache) {
  check_backward(cache, StrategyKind::kGpA2a, rank, grad_local);
  DistSgaCache c = std::move(cache);
  cache = DistSgaCache{};
  const Index d = c.x.cols();
  const double scale = attention_scale<double>(d);
  const Index cols_per_rank = d / group.size();

  // Each forward exchange is mirrored by one exchange in the opposite direction.
  Matrix dy_heads = to_head_sharded(group, rank, grad_local, cols_per_rank);
  AttentionGradients<double> attn = attention_backward(
      *c.graph, c.q, c.k, c.v, c.u, headed(std::move(dy_heads), c.head_range.count), scale);
  Matrix dv = to_node_sharded(group, rank, std::move(attn.v).to_dense(), c.plan);
  Matrix dk = to_node_sharded(group, rank, std::move(attn.k).to_dense(), c.plan);
  Matrix dq = to_node_sharded(group, rank, std::move(attn.q).to_dense(), c.plan);

  SgaGradients grads = local_weight_gradients(c, grad_local, dq, dk, dv);
  all_reduce_weight_gradients(group, rank, grads);
  return grads;
}

void write_memory_report(std::ostream& os, std::span<const MemoryReport> reports) {
  os << "rank,strategy,dense_activation_elems,edge_activation_elems,graph_storage_elems\n";
  for (const auto& r : reports) {
    os << r.rank << ',' << strategy_name(r.strategy) << ',' << r.dense_activation_elems << ','
       << r.edge_activation_elems << ',' << r.graph_storage_elems << '\n';
  }
}

DistributedResult run_distributed(StrategyKind kind, const CsrGraph& g, const Matrix& x,
                                  const SgaWeights& weights, Index heads, int p,
                                  const Matrix& grad_out) {
  check_strategy_config(kind, g.num_nodes(), heads, p);
  check_sga_shapes(x, g, weights, heads);
  if (grad_out.rows() != x.rows() || grad_out.cols() != x.cols()) {
    throw ShapeError("run_distributed: cotangent shape must match the output");
  }

  DistributedResult result;
  result.memory.resize(static_cast<std::size_t>(p));
  result.forward_kernels.resize(static_cast<std::size_t>(p));
  result.backward_kernels.resize(static_cast<std::size_t>(p));

  if (kind == StrategyKind::kSingleWorker) {
    ScopedKernelCensus fwd_census;
    SgaForward fwd = sga_forward(x, g, weights, heads);
    result.forward_kernels[0] = fwd_census.delta();
    result.memory[0] = {0, kind, fwd.cache.q.size() + fwd.cache.k.size() + fwd.cache.v.size(),
                        fwd.cache.u.size(), g.num_rows() + g.num_edges()};
    ScopedKernelCensus bwd_census;
    result.gradients = sga_backward(grad_out, fwd.cache);
    result.backward_kernels[0] = bwd_census.delta();
    result.output = std::move(fwd.out);
    result.ledger = CommLedger(1);
    return result;
  }

  const PartitionPlan plan = plan_partition(g.num_nodes(), p);
  WorkerGroup group(p);
  std::vector<Matrix> outputs(static_cast<std::size_t>(p));
  std::vector<SgaGradients> grads(static_cast<std::size_t>(p));

  run_workers(group, [&](int rank) {
    const auto r = static_cast<std::size_t>(rank);
    const Matrix g_local = slice_rows(grad_out, plan.begin(rank), plan.end(rank));
    if (kind == StrategyKind::kGpAg) {
      const ShardGpAg shard = shard_gp_ag(g, x, plan, rank);
      ScopedKernelCensus fwd_census;
      DistForward fwd = gp_ag_forward(group, rank, shard, weights, heads);
      result.forward_kernels[r] = fwd_census.delta();
      result.memory[r] = {rank, kind, fwd.cache.saved_dense_elems(), fwd.cache.saved_edge_elems(),
                          shard.graph_storage_elems()};
      ScopedKernelCensus bwd_census;
      grads[r] = gp_ag_backward(group, rank, g_local, std::move(fwd.cache));
      result.backward_kernels[r] = bwd_census.delta();
      outputs[r] = std::move(fwd.y_local);
    } else {
      const ShardGpA2a shard = shard_gp_a2a(g, x, plan, rank);
      ScopedKernelCensus fwd_census;
      DistForward fwd = gp_a2a_forward(group, rank, shard, weights, heads);
      result.forward_kernels[r] = fwd_census.delta();
      result.memory[r] = {rank, kind, fwd.cache.saved_dense_elems(), fwd.cache.saved_edge_elems(),
                          shard.graph_storage_elems()};
      ScopedKernelCensus bwd_census;
      grads[r] = gp_a2a_backward(group, rank, g_local, std::move(fwd.cache));
      result.backward_kernels[r] = bwd_census.delta();
      outputs[r] = std::move(fwd.y_local);
    }
  });

  result.output = concat_rows<double>(outputs);
  std::vector<Matrix> grad_x;
  grad_x.reserve(grads.size());
  for (auto& gr : grads) grad_x.push_back(std::move(gr.x));
  result.gradients = std::move(grads.front());
  result.gradients.x = concat_rows<double>(grad_x);
  result.ledger = group.ledger();
  return result;
}

}  // namespace gtpar
