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
#include <iostream>

#include "common.hpp"
#include "gtpar/graph_gen.hpp"
#include "gtpar/graph_io.hpp"

namespace gtpar::cli {

namespace {

struct GenerateOptions {
  std::string kind = "erdos-renyi";
  Index nodes = 1000;
  double avg_degree = 10.0;
  std::uint64_t seed = 0;
  std::string out = "-";
  std::string format = "edgelist";
  bool symmetrize = false;
};

int run_generate(const GenerateOptions& o) {
  CsrGraph g = generate_graph(parse_graph_kind(o.kind), o.nodes, o.avg_degree, o.seed);
  if (o.symmetrize) {
    std::vector<Edge> edges = g.edges();
    const std::size_t m = edges.size();
    for (std::size_t i = 0; i < m; ++i) edges.emplace_back(edges[i].second, edges[i].first);
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
    g = CsrGraph::from_edges(g.num_nodes(), edges);
  }
  const GraphFormat format = parse_graph_format(o.format);
  if (format == GraphFormat::kBinCsr && (o.out.empty() || o.out == "-")) {
    throw ArgumentError("bincsr output needs --out PATH");
  }
  if (o.out.empty() || o.out == "-") {
    write_edge_list(std::cout, g);
  } else {
    save_graph(o.out, g, format);
  }
  const DegreeStats s = degree_stats(g);
  std::cerr << "nodes=" << s.nodes << " edges=" << s.edges << " max_degree=" << s.max_degree
            << " avg_degree=" << s.avg_degree << '\n';
  return kPass;
}

}  // namespace

Command add_generate(CLI::App& root) {
  auto o = std::make_shared<GenerateOptions>();
  CLI::App* app = root.add_subcommand("generate", "Generate a synthetic graph");
  app->add_option("--kind", o->kind, "Graph model")
      ->check(CLI::IsMember({"erdos-renyi", "power-law"}))
      ->capture_default_str();
  app->add_option("-n,--nodes", o->nodes, "Node count")->check(CLI::PositiveNumber)->capture_default_str();
  app->add_option("--avg-degree", o->avg_degree, "Mean out-degree")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  app->add_option("--seed", o->seed, "Random seed")->capture_default_str();
  app->add_option("-o,--out", o->out, "Output path, - for stdout")->capture_default_str();
  app->add_option("--format", o->format, "Output format")
      ->check(CLI::IsMember({"edgelist", "bincsr"}))
      ->capture_default_str();
  app->add_flag("--symmetrize", o->symmetrize, "Add reverse edges");
  return {app, [o] { return run_generate(*o); }};
}

}  // namespace gtpar::cli
