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
#include <iomanip>
#include <iostream>

#include "common.hpp"
#include "gtpar/agp.hpp"
#include "gtpar/errors.hpp"

namespace gtpar::cli {

namespace {

struct PlanOptions {
  GraphInput graph;
  Index nodes = 0;
  Index edges = 0;
  Index heads = 0;
  int max_gpus = 8;
  std::string profile;
  double t1 = 0.0;
  std::string out = "-";
};

int run_plan(const PlanOptions& o) {
  GraphStats stats;
  if (!o.graph.path.empty()) {
    const CsrGraph g = load_input_graph(o.graph);
    stats.nodes = g.num_nodes();
    stats.edges = g.num_edges();
  } else {
    if (o.nodes <= 0) throw ArgumentError("plan needs --graph or --nodes and --edges");
    stats.nodes = o.nodes;
    stats.edges = o.edges;
  }
  stats.heads = o.heads;
  std::ifstream is(o.profile);
  if (!is) throw IoError("cannot open '" + o.profile + "'");
  const CostProfile profile = read_profile_json(is);
  stats.hidden = profile.hidden;
  const double t1 =
      o.t1 > 0.0 ? o.t1 : estimate_iter_time(profile, StrategyKind::kGpAg, 1, stats.nodes, stats.edges);
  const Selection sel = agp_select(stats, o.max_gpus, t1, profile);
  for (const auto& w : sel.warnings) std::cerr << "warning: " << w << '\n';

  std::cerr << "strategy gpus score feasible predicted_s note\n";
  for (const Candidate& c : sel.candidates) {
    std::cerr << strategy_name(c.strategy) << ' ' << c.gpus << ' ' << std::setprecision(6) << c.score << ' '
              << (c.feasible ? "yes" : "no") << ' ' << c.predicted_iter_time << ' ' << c.note << '\n';
  }
  OutputFile out(o.out);
  write_plan_json(out.stream(), sel);
  return kPass;
}

}  // namespace

Command add_plan(CLI::App& root) {
  auto o = std::make_shared<PlanOptions>();
  CLI::App* app = root.add_subcommand("plan", "Pick a strategy and worker count from a cost profile");
  add_graph_options(app, o->graph);
  app->add_option("-n,--nodes", o->nodes, "Node count when --graph is absent");
  app->add_option("-e,--edges", o->edges, "Edge count when --graph is absent")->check(CLI::NonNegativeNumber);
  app->add_option("--heads", o->heads, "Attention heads; GP-A2A needs heads divisible by the worker count")
      ->check(CLI::NonNegativeNumber);
  app->add_option("-p,--workers,--max-gpus", o->max_gpus, "Largest worker count to consider")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  app->add_option("--profile", o->profile, "Cost profile JSON")->required();
  app->add_option("--t1", o->t1, "Measured single-worker iteration time (default alpha_1 * E)")
      ->check(CLI::NonNegativeNumber);
  app->add_option("-o,--out", o->out, "Plan JSON output, - for stdout")->capture_default_str();
  return {app, [o] { return run_plan(*o); }};
}

}  // namespace gtpar::cli
