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

#include <fstream>
#include <iostream>
#include <vector>

#include "common.hpp"
#include "gtpar/agp.hpp"
#include "gtpar/errors.hpp"
#include "gtpar/graph_gen.hpp"

namespace gtpar::cli {

namespace {

struct ProfileOptions {
  GraphInput graph;
  Index nodes = 10000;
  double avg_degree = 16.0;
  Index dim = 64;
  Index heads = 4;
  int max_gpus = 8;
  std::string timings;
  std::string timings_out;
  double latency_s = BandwidthModel{}.latency_s;
  double elements_per_s = BandwidthModel{}.elements_per_s;
  int runs = kDefaultRuns;
  int warmup = kDefaultWarmup;
  std::uint64_t seed = 0;
  std::string out = "-";
};

int run_profile(const ProfileOptions& o) {
  const CsrGraph g = o.graph.path.empty() ? generate_erdos_renyi(o.nodes, o.avg_degree, o.seed)
                                          : load_input_graph(o.graph);
  const AlphaMeasurement alpha = measure_alpha(g, o.dim, o.heads, o.seed, o.runs, o.warmup);
  if (alpha.low_confidence) {
    std::cerr << "warning: alpha measured with " << alpha.runs << " run(s) and " << alpha.warmup
              << " warmup run(s); low confidence\n";
  }

  TimingTable table;
  if (!o.timings.empty()) {
    std::ifstream is(o.timings);
    if (!is) throw IoError("cannot open '" + o.timings + "'");
    table = read_timing_table(is);
  } else {
    // Simulated transfers over node counts spanning three decades.
    const BandwidthModel model{o.latency_s, o.elements_per_s};
    std::vector<Index> node_counts;
    for (Index n = 64; n <= 64000; n *= 10) node_counts.push_back(n);
    for (int p = 2; p <= o.max_gpus; ++p) {
      table[{StrategyKind::kGpAg, p}] =
          simulate_strategy_timings(model, StrategyKind::kGpAg, p, o.dim, node_counts);
      if (o.dim % p != 0) {
        std::cerr << "note: no gp-a2a entry for p=" << p << " (d=" << o.dim << " not divisible)\n";
        continue;
      }
      table[{StrategyKind::kGpA2a, p}] =
          simulate_strategy_timings(model, StrategyKind::kGpA2a, p, o.dim, node_counts);
    }
  }
  if (!o.timings_out.empty()) {
    OutputFile out(o.timings_out);
    write_timing_table(out.stream(), table);
  }
  const CostProfile profile = build_profile(table, o.dim, 8, alpha.alpha_1);
  OutputFile out(o.out);
  write_profile_json(out.stream(), profile);
  std::cerr << "alpha_1=" << alpha.alpha_1 << " s/edge over E=" << g.num_edges() << '\n';
  return kPass;
}

}  // namespace

Command add_profile(CLI::App& root) {
  auto o = std::make_shared<ProfileOptions>();
  CLI::App* app = root.add_subcommand("profile", "Measure alpha and fit beta into a cost profile");
  add_graph_options(app, o->graph);
  app->add_option("-n,--nodes", o->nodes, "Nodes of the generated graph when --graph is absent")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  app->add_option("--avg-degree", o->avg_degree, "Mean degree of the generated graph")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  app->add_option("--dim", o->dim, "Hidden dimension d")->check(CLI::PositiveNumber)->capture_default_str();
  app->add_option("--heads", o->heads, "Attention heads h")->check(CLI::PositiveNumber)->capture_default_str();
  app->add_option("-p,--workers", o->max_gpus, "Largest worker count to profile")
      ->check(CLI::Range(2, 1024))
      ->capture_default_str();
  app->add_option("--timings", o->timings, "Measured timing CSV (collective,gpus,elements,seconds)");
  app->add_option("--timings-out", o->timings_out, "Write the timing table used for the fit");
  app->add_option("--latency", o->latency_s, "Simulated per-hop latency in seconds")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  app->add_option("--bandwidth", o->elements_per_s, "Simulated bandwidth in elements per second")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  app->add_option("--runs", o->runs, "Timed runs for alpha")->check(CLI::PositiveNumber)->capture_default_str();
  app->add_option("--warmup", o->warmup, "Discarded warmup runs")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  app->add_option("--seed", o->seed, "Random seed")->capture_default_str();
  app->add_option("-o,--out", o->out, "Profile JSON output, - for stdout")->capture_default_str();
  return {app, [o] { return run_profile(*o); }};
}

}  // namespace gtpar::cli
