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

#include <cmath>
#include <fstream>
#include <iostream>

#include "common.hpp"
#include "gtpar/errors.hpp"
#include "gtpar/graph_io.hpp"
#include "gtpar/model.hpp"

namespace gtpar::cli {

namespace {

struct TrainOptions {
  GraphInput graph;
  std::string labels;
  Index dim = 16;
  Index heads = 4;
  Index layers = 2;
  int workers = 1;
  std::string strategy = "single";
  int steps = 10;
  double lr = 0.1;
  std::uint64_t seed = 0;
  std::string precision = "double";
  std::string loss_log = "-";
  std::string checkpoint;
};

NodeLabels load_labels(const std::string& path, Index nodes) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open '" + path + "'");
  NodeLabels labels;
  labels.classes.assign(static_cast<std::size_t>(nodes), 0);
  labels.mask.assign(static_cast<std::size_t>(nodes), 0);
  for (const LabelEntry& e : read_labels(is)) {
    if (e.node >= nodes) {
      throw DataError("label for node " + std::to_string(e.node) + " but the graph has " +
                      std::to_string(nodes) + " nodes");
    }
    labels.classes[static_cast<std::size_t>(e.node)] = e.label;
    labels.mask[static_cast<std::size_t>(e.node)] = 1;
  }
  if (labels.num_labeled() == 0) throw ArgumentError("labels file '" + path + "' has no labels");
  return labels;
}

int run_train(const TrainOptions& o) {
  if (o.graph.path.empty()) throw ArgumentError("train needs --graph");
  if (o.labels.empty()) throw ArgumentError("train needs --labels");
  const CsrGraph g = load_input_graph(o.graph);
  const NodeLabels labels = load_labels(o.labels, g.num_nodes());
  Index classes = 0;
  for (std::size_t i = 0; i < labels.classes.size(); ++i) {
    if (labels.mask[i] != 0) classes = std::max(classes, labels.classes[i] + 1);
  }
  classes = std::max<Index>(classes, 2);

  const Execution exec{parse_strategy(o.strategy), o.workers};
  if (exec.kind != StrategyKind::kSingleWorker) check_strategy_config(exec.kind, g.num_nodes(), o.heads, o.workers);
  TrainConfig cfg{o.lr, o.steps, o.seed, o.precision == "single" ? Precision::kSingle : Precision::kDouble};
  cfg.validate();

  // Node features are seeded random vectors; the model is initialised from a
  // separate stream of the same seed.
  Rng rng(o.seed ^ 0x9e3779b97f4a7c15ULL);
  const Matrix x = random_matrix(rng, g.num_nodes(), o.dim, 1.0);
  GraphTransformer model = GraphTransformer::init(o.dim, o.heads, o.layers, classes, o.seed);
  const std::vector<double> losses = train(model, g, x, labels, cfg, exec);

  OutputFile log(o.loss_log);
  write_loss_log(log.stream(), losses);
  if (!o.checkpoint.empty()) save_checkpoint(o.checkpoint, model);
  if (!losses.empty()) std::cerr << "final loss " << losses.back() << " after " << losses.size() << " steps\n";
  return kPass;
}

}  // namespace

Command add_train(CLI::App& root) {
  auto o = std::make_shared<TrainOptions>();
  CLI::App* app = root.add_subcommand("train", "Train a graph transformer node classifier");
  add_graph_options(app, o->graph);
  app->add_option("--labels", o->labels, "Labels file with `node_id class_id` rows");
  app->add_option("--dim", o->dim, "Hidden dimension d")->check(CLI::PositiveNumber)->capture_default_str();
  app->add_option("--heads", o->heads, "Attention heads h")->check(CLI::PositiveNumber)->capture_default_str();
  app->add_option("--layers", o->layers, "Attention blocks")->check(CLI::PositiveNumber)->capture_default_str();
  app->add_option("-p,--workers", o->workers, "Worker count")->check(CLI::PositiveNumber)->capture_default_str();
  app->add_option("--strategy", o->strategy, "Parallel strategy")
      ->check(CLI::IsMember({"single", "gp-ag", "gp-a2a"}))
      ->capture_default_str();
  app->add_option("--steps", o->steps, "Gradient-descent steps")->check(CLI::NonNegativeNumber)->capture_default_str();
  app->add_option("--lr", o->lr, "Learning rate")->check(CLI::NonNegativeNumber)->capture_default_str();
  app->add_option("--seed", o->seed, "Random seed")->capture_default_str();
  app->add_option("--precision", o->precision, "Arithmetic precision (single worker only for single)")
      ->check(CLI::IsMember({"double", "single"}))
      ->capture_default_str();
  app->add_option("--loss-log", o->loss_log, "Loss CSV output, - for stdout")->capture_default_str();
  app->add_option("--checkpoint", o->checkpoint, "Write the final model here");
  return {app, [o] { return run_train(*o); }};
}

}  // namespace gtpar::cli
