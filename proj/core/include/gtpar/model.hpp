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

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "gtpar/csr_graph.hpp"
#include "gtpar/dense.hpp"
#include "gtpar/sga.hpp"
#include "gtpar/strategies.hpp"

namespace gtpar {

// Stack of attention blocks with ReLU between them, followed by a bias-free
// d x C linear classifier.
struct GraphTransformer {
  Index hidden = 0;
  Index heads = 0;
  Index classes = 0;
  std::vector<SgaWeights> layers;
  Matrix classifier;

  // Every weight drawn uniformly from [-1/sqrt(d), 1/sqrt(d)], layer by layer
  // (W_Q, W_K, W_V, W_o), then the classifier.
  static GraphTransformer init(Index hidden, Index heads, Index num_layers, Index classes,
                               std::uint64_t seed);

  void validate() const;
  friend bool operator==(const GraphTransformer&, const GraphTransformer&);
};

struct ModelGradients {
  std::vector<SgaGradients> layers;
  Matrix classifier;
};

// Class index per node; only nodes with mask != 0 contribute to the loss.
struct NodeLabels {
  std::vector<Index> classes;
  std::vector<std::uint8_t> mask;

  Index num_labeled() const;
};

enum class Precision { kDouble, kSingle };

struct TrainConfig {
  double lr = 0.1;
  int steps = 10;
  std::uint64_t seed = 0;
  Precision precision = Precision::kDouble;

  void validate() const;
};

struct Execution {
  StrategyKind kind = StrategyKind::kSingleWorker;
  int workers = 1;
};

// Logits N x C on a single worker.
Matrix forward(const GraphTransformer& model, const CsrGraph& g, const Matrix& x);

struct LossAndGrad {
  double loss = 0.0;
  Matrix grad_logits;
};

// Mean softmax cross-entropy over masked nodes and its gradient w.r.t. the
// logits. Throws ArgumentError on an empty mask or out-of-range labels.
LossAndGrad masked_cross_entropy(const Matrix& logits, const NodeLabels& labels);

// Loss at the current parameters and the full gradient, computed under the
// given execution.
double loss_and_gradients(const GraphTransformer& model, const CsrGraph& g, const Matrix& x,
                          const NodeLabels& labels, Execution exec, ModelGradients& grads,
                          Precision precision = Precision::kDouble);

void apply_gradients(GraphTransformer& model, const ModelGradients& grads, double lr);

// One full-batch gradient-descent update. Returns the loss before the update.
double train_step(GraphTransformer& model, const CsrGraph& g, const Matrix& x,
                  const NodeLabels& labels, const TrainConfig& cfg, Execution exec);

// cfg.steps updates; returns the per-step losses.
std::vector<double> train(GraphTransformer& model, const CsrGraph& g, const Matrix& x,
                          const NodeLabels& labels, const TrainConfig& cfg, Execution exec);

// CSV: step,loss
void write_loss_log(std::ostream& os, std::span<const double> losses);

// Binary checkpoint: "GTPARCKP", u64 version, u64 hidden/heads/classes/layers,
// then each matrix as i64 rows, i64 cols and little-endian f64 data.
void save_checkpoint(std::ostream& os, const GraphTransformer& model);
GraphTransformer load_checkpoint(std::istream& is);
void save_checkpoint(const std::string& path, const GraphTransformer& model);
GraphTransformer load_checkpoint(const std::string& path);

}  // namespace gtpar
