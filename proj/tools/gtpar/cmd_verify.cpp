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

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>

#include "common.hpp"
#include "gtpar/agp.hpp"
#include "gtpar/errors.hpp"
#include "gtpar/graph_gen.hpp"
#include "gtpar/sga.hpp"
#include "gtpar/strategies.hpp"

namespace gtpar::cli {

namespace {

constexpr double kEquivalenceTol = 1e-9;
constexpr double kFiniteDiffTol = 1e-6;
constexpr double kFiniteDiffEps = 1e-5;

struct VerifyOptions {
  GraphInput graph;
  Index nodes = 64;
  double avg_degree = 4.0;
  Index dim = 16;
  Index heads = 4;
  int workers = 1;
  std::string strategy = "gp-ag";
  std::string profile;
  std::uint64_t seed = 0;
  int fd_entries = 64;
  std::string memory_report;
};

double max_rel_diff(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) return INFINITY;
  double diff = 0.0;
  double scale = 0.0;
  for (std::size_t i = 0; i < a.values().size(); ++i) {
    diff = std::max(diff, std::abs(a.values()[i] - b.values()[i]));
    scale = std::max(scale, std::abs(b.values()[i]));
  }
  return diff == 0.0 ? 0.0 : diff / std::max(scale, 1e-300);
}

double dot(const Matrix& a, const Matrix& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.values().size(); ++i) s += a.values()[i] * b.values()[i];
  return s;
}

// Central differences of L = <grad_out, sga_forward(x)> on up to `limit`
// entries per parameter, chosen by the seeded generator.
double finite_difference_error(const CsrGraph& g, Matrix x, SgaWeights w, Index heads,
                               const Matrix& grad_out, const SgaGradients& analytic, int limit,
                               Rng& rng) {
  auto loss = [&] { return dot(grad_out, sga_forward(x, g, w, heads).out); };
  double worst = 0.0;
  auto check = [&](Matrix& param, const Matrix& grad) {
    auto p = param.values();
    const std::size_t n = p.size();
    const std::size_t count = std::min(n, static_cast<std::size_t>(limit));
    for (std::size_t t = 0; t < count; ++t) {
      const std::size_t i = count == n ? t : static_cast<std::size_t>(rng.index(n));
      const double orig = p[i];
      p[i] = orig + kFiniteDiffEps;
      const double up = loss();
      p[i] = orig - kFiniteDiffEps;
      const double down = loss();
      p[i] = orig;
      const double numeric = (up - down) / (2 * kFiniteDiffEps);
      const double a = grad.values()[i];
      worst = std::max(worst, std::abs(a - numeric) / std::max({std::abs(a), std::abs(numeric), 1e-2}));
    }
  };
  check(x, analytic.x);
  check(w.w_q, analytic.w_q);
  check(w.w_k, analytic.w_k);
  check(w.w_v, analytic.w_v);
  check(w.w_o, analytic.w_o);
  return worst;
}

double gradients_rel_diff(const SgaGradients& a, const SgaGradients& b) {
  return std::max({max_rel_diff(a.x, b.x), max_rel_diff(a.w_q, b.w_q), max_rel_diff(a.w_k, b.w_k),
                   max_rel_diff(a.w_v, b.w_v), max_rel_diff(a.w_o, b.w_o)});
}

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

void print_check(bool ok, const std::string& what) {
  std::cout << (ok ? "PASS " : "FAIL ") << what << '\n';
}

int run_verify(const VerifyOptions& o) {
  CsrGraph g = o.graph.path.empty() ? generate_erdos_renyi(o.nodes, o.avg_degree, o.seed)
                                    : load_input_graph(o.graph);
  const Index n = g.num_nodes();
  const Index d = o.dim;
  const Index h = o.heads;

  StrategyKind kind = StrategyKind::kSingleWorker;
  int p = o.workers;
  if (o.strategy == "auto") {
    if (o.profile.empty()) throw ArgumentError("--strategy auto needs --profile");
    std::ifstream is(o.profile);
    if (!is) throw IoError("cannot open '" + o.profile + "'");
    const CostProfile profile = read_profile_json(is);
    const double t1 = estimate_iter_time(profile, StrategyKind::kGpAg, 1, n, g.num_edges());
    const Selection sel = agp_select({n, g.num_edges(), d, h}, o.workers, t1, profile);
    for (const auto& w : sel.warnings) std::cerr << "warning: " << w << '\n';
    kind = sel.plan.strategy;
    p = sel.plan.gpus;
    std::cout << "auto: selected " << strategy_name(kind) << " on " << p << " worker(s)\n";
  } else {
    kind = parse_strategy(o.strategy);
  }
  if (kind == StrategyKind::kSingleWorker && p != 1) {
    throw ConfigError("single-worker strategy runs with p=1");
  }
  check_strategy_config(kind, n, h, p);

  Rng rng(o.seed);
  const Matrix x = random_matrix(rng, n, d, 1.0);
  const double scale = 1.0 / std::sqrt(static_cast<double>(d));
  const SgaWeights w{random_matrix(rng, d, d, scale), random_matrix(rng, d, d, scale),
                     random_matrix(rng, d, d, scale), random_matrix(rng, d, d, scale)};
  const Matrix grad_out = random_matrix(rng, n, d, 1.0);

  const DistributedResult r = run_distributed(kind, g, x, w, h, p, grad_out);
  const SgaForward ref = sga_forward(x, g, w, h);
  const SgaGradients ref_grads = sga_backward(grad_out, ref.cache);

  std::cout << "graph: N=" << n << " E=" << g.num_edges() << "  d=" << d << " h=" << h
            << "  strategy=" << strategy_name(kind) << " p=" << p << '\n';
  std::cout << std::setprecision(3);
  bool ok = true;
  auto record = [&](bool pass, const std::string& what) {
    ok = ok && pass;
    print_check(pass, what);
  };

  const double fwd_oracle = max_rel_diff(r.output, sga_oracle(x, g, w, h));
  record(fwd_oracle < kEquivalenceTol, "forward vs per-node oracle: max rel diff " + sci(fwd_oracle));
  const double fwd_single = max_rel_diff(r.output, ref.out);
  record(fwd_single < kEquivalenceTol, "forward vs single worker: max rel diff " + sci(fwd_single));
  const double grad_single = gradients_rel_diff(r.gradients, ref_grads);
  record(grad_single < kEquivalenceTol,
         "gradients vs single worker: max rel diff " + sci(grad_single));
  Rng fd_rng(o.seed + 1);
  const double fd = finite_difference_error(g, x, w, h, grad_out, r.gradients, o.fd_entries, fd_rng);
  record(fd < kFiniteDiffTol, "gradients vs finite differences: max rel error " + sci(fd));

  // Collective census and per-rank volumes. The general formulas reduce to
  // 4Nd(p-1)/p and 8Nd(p-1)/p^2 when p divides N.
  const PartitionPlan plan = p > 1 ? plan_partition(n, p) : PartitionPlan({0, n});
  bool census_ok = true;
  bool volume_ok = true;
  std::cout << "rank  all_gather  reduce_scatter  all_to_all  all_reduce  moved  expected\n";
  for (int rank = 0; rank < p; ++rank) {
    const auto calls = [&](Primitive q) { return r.ledger.at(rank, q).calls; };
    std::int64_t want_ag = 0, want_rs = 0, want_a2a = 0;
    Index expected = 0;
    const Index nr = plan.size(rank);
    const std::initializer_list<Primitive> moved_kinds = {Primitive::kAllGather, Primitive::kReduceScatter,
                                                          Primitive::kAllToAll};
    if (p > 1 && kind == StrategyKind::kGpAg) {
      want_ag = want_rs = 2;
      expected = 2 * d * (n - nr) + 2 * d * nr * (p - 1);
    } else if (p > 1 && kind == StrategyKind::kGpA2a) {
      want_a2a = 8;
      expected = 4 * (n - nr) * d / p + 4 * nr * d * (p - 1) / p;
    }
    census_ok = census_ok && calls(Primitive::kAllGather) == want_ag &&
                calls(Primitive::kReduceScatter) == want_rs && calls(Primitive::kAllToAll) == want_a2a;
    const Index moved = r.ledger.received(rank, moved_kinds);
    volume_ok = volume_ok && moved == expected && r.ledger.sent(rank, moved_kinds) == expected;
    std::cout << std::setw(4) << rank << std::setw(12) << calls(Primitive::kAllGather) << std::setw(16)
              << calls(Primitive::kReduceScatter) << std::setw(12) << calls(Primitive::kAllToAll)
              << std::setw(12) << calls(Primitive::kAllReduce) << std::setw(7) << moved << std::setw(10)
              << expected << '\n';
  }
  record(census_ok, std::string("collective census (") +
                        (kind == StrategyKind::kGpAg && p > 1    ? "2 all-gather + 2 reduce-scatter"
                         : kind == StrategyKind::kGpA2a && p > 1 ? "8 all-to-all"
                                                                 : "none") +
                        " per rank)");
  record(volume_ok, "per-rank transferred elements match the strategy formula");
  if (p > 1 && n % p == 0) {
    const Index table = kind == StrategyKind::kGpAg ? 4 * n * d * (p - 1) / p : 8 * n * d * (p - 1) / (p * p);
    std::cout << "closed form per rank: " << table << " elements\n";
  }

  std::cout << "rank  dense_activation  edge_activation  graph_storage\n";
  for (const MemoryReport& m : r.memory) {
    std::cout << std::setw(4) << m.rank << std::setw(18) << m.dense_activation_elems << std::setw(17)
              << m.edge_activation_elems << std::setw(15) << m.graph_storage_elems << '\n';
  }
  if (!o.memory_report.empty()) {
    OutputFile out(o.memory_report);
    write_memory_report(out.stream(), r.memory);
  }
  std::cout << (ok ? "PASS" : "FAIL") << '\n';
  return ok ? kPass : kVerificationFailure;
}

}  // namespace

Command add_verify(CLI::App& root) {
  auto o = std::make_shared<VerifyOptions>();
  CLI::App* app = root.add_subcommand("verify", "Check a strategy against the oracles and census");
  add_graph_options(app, o->graph);
  app->add_option("-n,--nodes", o->nodes, "Nodes of the generated graph when --graph is absent")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  app->add_option("--avg-degree", o->avg_degree, "Mean degree of the generated graph")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  app->add_option("--dim", o->dim, "Hidden dimension d")->check(CLI::PositiveNumber)->capture_default_str();
  app->add_option("--heads", o->heads, "Attention heads h")->check(CLI::PositiveNumber)->capture_default_str();
  app->add_option("-p,--workers", o->workers, "Worker count (maximum for auto)")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  app->add_option("--strategy", o->strategy, "Parallel strategy")
      ->check(CLI::IsMember({"single", "gp-ag", "gp-a2a", "auto"}))
      ->capture_default_str();
  app->add_option("--profile", o->profile, "Cost profile JSON for --strategy auto");
  app->add_option("--seed", o->seed, "Random seed")->capture_default_str();
  app->add_option("--fd-entries", o->fd_entries, "Finite-difference entries checked per parameter")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  app->add_option("--memory-report", o->memory_report, "Write per-rank memory CSV here");
  return {app, [o] { return run_verify(*o); }};
}

}  // namespace gtpar::cli
