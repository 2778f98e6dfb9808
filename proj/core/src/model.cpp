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

#include "gtpar/model.hpp"

#include <cmath>
#include <fstream>
#include <ostream>
#include <string>

#include "binary_io.hpp"
#include "gtpar/random.hpp"

namespace gtpar {

namespace {

constexpr std::string_view kCheckpointMagic = "GTPARCKP";
constexpr std::uint64_t kCheckpointVersion = 1;

Matrix uniform_matrix(Rng& rng, Index rows, Index cols, double bound) {
  Matrix m(rows, cols);
  for (double& v : m.values()) v = rng.uniform(-bound, bound);
  return m;
}

template <typename T>
DenseMatrix<T> relu(const DenseMatrix<T>& m) {
  DenseMatrix<T> out = m;
  for (T& v : out.values()) v = v > T{0} ? v : T{0};
  return out;
}

// grad *= 1[pre > 0]
template <typename T>
void relu_backward_inplace(DenseMatrix<T>& grad, const DenseMatrix<T>& pre) {
  auto g = grad.values();
  auto p = pre.values();
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (!(p[i] > T{0})) g[i] = T{0};
  }
}

template <typename To, typename From>
BasicSgaWeights<To> cast_weights(const BasicSgaWeights<From>& w) {
  return {cast_matrix<To>(w.w_q), cast_matrix<To>(w.w_k), cast_matrix<To>(w.w_v),
          cast_matrix<To>(w.w_o)};
}

template <typename To, typename From>
BasicSgaGradients<To> cast_gradients(const BasicSgaGradients<From>& g) {
  return {cast_matrix<To>(g.x), cast_matrix<To>(g.w_q), cast_matrix<To>(g.w_k),
          cast_matrix<To>(g.w_v), cast_matrix<To>(g.w_o)};
}

void check_inputs(const GraphTransformer& model, const CsrGraph& g, const Matrix& x,
                  const NodeLabels& labels) {
  model.validate();
  if (x.rows() != g.num_nodes() || x.cols() != model.hidden) {
    throw ShapeError("model input must be N x d (N=" + std::to_string(g.num_nodes()) +
                     ", d=" + std::to_string(model.hidden) + ")");
  }
  if (static_cast<Index>(labels.classes.size()) != g.num_nodes() ||
      static_cast<Index>(labels.mask.size()) != g.num_nodes()) {
    throw ShapeError("labels and mask need one entry per node");
  }
}

template <typename T>
double single_worker_pass(const GraphTransformer& model, const CsrGraph& g, const Matrix& x,
                          const NodeLabels& labels, ModelGradients& grads) {
  const auto num_layers = model.layers.size();
  std::vector<BasicSgaWeights<T>> weights;
  weights.reserve(num_layers);
  for (const auto& w : model.layers) weights.push_back(cast_weights<T>(w));
  const DenseMatrix<T> classifier = cast_matrix<T>(model.classifier);

  std::vector<BasicSgaCache<T>> caches;
  std::vector<DenseMatrix<T>> pre_activation;
  DenseMatrix<T> h = cast_matrix<T>(x);
  for (std::size_t l = 0; l < num_layers; ++l) {
    BasicSgaForward<T> fwd = sga_forward(h, g, weights[l], model.heads);
    caches.push_back(std::move(fwd.cache));
    if (l + 1 < num_layers) {
      h = relu(fwd.out);
      pre_activation.push_back(std::move(fwd.out));
    } else {
      h = std::move(fwd.out);
    }
  }

  const LossAndGrad ce = masked_cross_entropy(cast_matrix<double>(matmul(h, classifier)), labels);
  const DenseMatrix<T> dlogits = cast_matrix<T>(ce.grad_logits);
  grads.classifier = cast_matrix<double>(matmul_tn(h, dlogits));
  DenseMatrix<T> dh = matmul_nt(dlogits, classifier);

  grads.layers.assign(num_layers, {});
  for (std::size_t l = num_layers; l-- > 0;) {
    if (l + 1 < num_layers) relu_backward_inplace(dh, pre_activation[l]);
    BasicSgaGradients<T> lg = sga_backward(dh, caches[l]);
    dh = std::move(lg.x);
    lg.x = DenseMatrix<T>();
    grads.layers[l] = cast_gradients<double>(lg);
  }
  return ce.loss;
}

double distributed_pass(const GraphTransformer& model, const CsrGraph& g, const Matrix& x,
                        const NodeLabels& labels, Execution exec, ModelGradients& grads) {
  const int p = exec.workers;
  check_strategy_config(exec.kind, g.num_nodes(), model.heads, p);
  const PartitionPlan plan = plan_partition(g.num_nodes(), p);
  const auto num_layers = model.layers.size();
  WorkerGroup group(p);
  double loss = 0.0;

  run_workers(group, [&](int rank) {
    const Index begin = plan.begin(rank);
    const Index end = plan.end(rank);
    ShardGpAg ag;
    ShardGpA2a a2a;
    if (exec.kind == StrategyKind::kGpAg) {
      ag = shard_gp_ag(g, x, plan, rank);
    } else {
      a2a = shard_gp_a2a(g, x, plan, rank);
    }

    std::vector<DistSgaCache> caches;
    std::vector<Matrix> pre_activation;
    Matrix h = slice_rows(x, begin, end);
    for (std::size_t l = 0; l < num_layers; ++l) {
      DistForward fwd;
      if (exec.kind == StrategyKind::kGpAg) {
        ag.features = std::move(h);
        fwd = gp_ag_forward(group, rank, ag, model.layers[l], model.heads);
      } else {
        a2a.features = std::move(h);
        fwd = gp_a2a_forward(group, rank, a2a, model.layers[l], model.heads);
      }
      caches.push_back(std::move(fwd.cache));
      if (l + 1 < num_layers) {
        h = relu(fwd.y_local);
        pre_activation.push_back(std::move(fwd.y_local));
      } else {
        h = std::move(fwd.y_local);
      }
    }

    // Loss terms of owned labelled rows, normalised by the global count.
    const Matrix logits = matmul(h, model.classifier);
    NodeLabels local;
    local.classes.assign(labels.classes.begin() + begin, labels.classes.begin() + end);
    local.mask.assign(labels.mask.begin() + begin, labels.mask.begin() + end);
    const auto total = static_cast<double>(labels.num_labeled());
    const auto owned = static_cast<double>(local.num_labeled());
    Matrix dlogits(logits.rows(), logits.cols());
    double local_sum = 0.0;
    if (owned > 0) {
      LossAndGrad ce = masked_cross_entropy(logits, local);
      local_sum = ce.loss * owned;
      const double rescale = owned / total;
      for (double& v : ce.grad_logits.values()) v *= rescale;
      dlogits = std::move(ce.grad_logits);
    }
    const Matrix loss_sum = group.all_reduce(rank, Matrix{{local_sum}});

    Matrix d_classifier = group.all_reduce(rank, matmul_tn(h, dlogits));
    Matrix dh = matmul_nt(dlogits, model.classifier);
    std::vector<SgaGradients> layer_grads(num_layers);
    for (std::size_t l = num_layers; l-- > 0;) {
      if (l + 1 < num_layers) relu_backward_inplace(dh, pre_activation[l]);
      SgaGradients lg = exec.kind == StrategyKind::kGpAg
                            ? gp_ag_backward(group, rank, dh, std::move(caches[l]))
                            : gp_a2a_backward(group, rank, dh, std::move(caches[l]));
      dh = std::move(lg.x);
      lg.x = Matrix();
      layer_grads[l] = std::move(lg);
    }

    if (rank == 0) {
      loss = loss_sum(0, 0) / total;
      grads.classifier = std::move(d_classifier);
      grads.layers = std::move(layer_grads);
    }
  });
  return loss;
}

}  // namespace

GraphTransformer GraphTransformer::init(Index hidden, Index heads, Index num_layers, Index classes,
                                        std::uint64_t seed) {
  if (hidden <= 0 || heads <= 0 || num_layers <= 0 || classes <= 0) {
    throw ArgumentError("model dimensions must be positive");
  }
  if (hidden % heads != 0) throw ConfigError("heads must divide the hidden dimension");
  GraphTransformer m;
  m.hidden = hidden;
  m.heads = heads;
  m.classes = classes;
  Rng rng(seed);
  const double bound = 1.0 / std::sqrt(static_cast<double>(hidden));
  for (Index l = 0; l < num_layers; ++l) {
    SgaWeights w;
    w.w_q = uniform_matrix(rng, hidden, hidden, bound);
    w.w_k = uniform_matrix(rng, hidden, hidden, bound);
    w.w_v = uniform_matrix(rng, hidden, hidden, bound);
    w.w_o = uniform_matrix(rng, hidden, hidden, bound);
    m.layers.push_back(std::move(w));
  }
  m.classifier = uniform_matrix(rng, hidden, classes, bound);
  return m;
}

void GraphTransformer::validate() const {
  if (hidden <= 0 || heads <= 0 || hidden % heads != 0 || layers.empty()) {
    throw ConfigError("model needs d > 0, h | d and at least one layer");
  }
  for (const auto& w : layers) {
    for (const Matrix* m : {&w.w_q, &w.w_k, &w.w_v, &w.w_o}) {
      if (m->rows() != hidden || m->cols() != hidden) throw ShapeError("layer weights must be d x d");
    }
  }
  if (classifier.rows() != hidden || classifier.cols() != classes) {
    throw ShapeError("classifier must be d x C");
  }
}

bool operator==(const GraphTransformer& a, const GraphTransformer& b) {
  if (a.hidden != b.hidden || a.heads != b.heads || a.classes != b.classes ||
      a.layers.size() != b.layers.size() || !(a.classifier == b.classifier)) {
    return false;
  }
  for (std::size_t l = 0; l < a.layers.size(); ++l) {
    const auto& x = a.layers[l];
    const auto& y = b.layers[l];
    if (!(x.w_q == y.w_q && x.w_k == y.w_k && x.w_v == y.w_v && x.w_o == y.w_o)) return false;
  }
  return true;
}

Index NodeLabels::num_labeled() const {
  Index n = 0;
  for (auto m : mask) n += m != 0 ? 1 : 0;
  return n;
}

void TrainConfig::validate() const {
  if (!(lr >= 0.0) || !std::isfinite(lr)) throw ArgumentError("learning rate must be finite and >= 0");
  if (steps < 0) throw ArgumentError("steps must be >= 0");
}

Matrix forward(const GraphTransformer& model, const CsrGraph& g, const Matrix& x) {
  model.validate();
  Matrix h = x;
  for (std::size_t l = 0; l < model.layers.size(); ++l) {
    SgaForward fwd = sga_forward(h, g, model.layers[l], model.heads);
    h = l + 1 < model.layers.size() ? relu(fwd.out) : std::move(fwd.out);
  }
  return matmul(h, model.classifier);
}

LossAndGrad masked_cross_entropy(const Matrix& logits, const NodeLabels& labels) {
  if (static_cast<Index>(labels.classes.size()) != logits.rows() ||
      static_cast<Index>(labels.mask.size()) != logits.rows()) {
    throw ShapeError("labels and mask need one entry per logit row");
  }
  const Index count = labels.num_labeled();
  if (count == 0) throw ArgumentError("cross-entropy mask selects no nodes");
  LossAndGrad out{0.0, Matrix(logits.rows(), logits.cols())};
  const double inv = 1.0 / static_cast<double>(count);
  for (Index i = 0; i < logits.rows(); ++i) {
    if (labels.mask[static_cast<std::size_t>(i)] == 0) continue;
    const Index y = labels.classes[static_cast<std::size_t>(i)];
    if (y < 0 || y >= logits.cols()) {
      throw ArgumentError("label " + std::to_string(y) + " of node " + std::to_string(i) +
                          " outside [0, " + std::to_string(logits.cols()) + ")");
    }
    auto row = logits.row(i);
    const double mx = *std::max_element(row.begin(), row.end());
    double sum = 0.0;
    for (double v : row) sum += std::exp(v - mx);
    const double log_z = mx + std::log(sum);
    out.loss += (log_z - row[static_cast<std::size_t>(y)]) * inv;
    auto grow = out.grad_logits.row(i);
    for (std::size_t c = 0; c < row.size(); ++c) grow[c] = std::exp(row[c] - log_z) * inv;
    grow[static_cast<std::size_t>(y)] -= inv;
  }
  return out;
}

double loss_and_gradients(const GraphTransformer& model, const CsrGraph& g, const Matrix& x,
                          const NodeLabels& labels, Execution exec, ModelGradients& grads,
                          Precision precision) {
  check_inputs(model, g, x, labels);
  if (labels.num_labeled() == 0) throw ArgumentError("cross-entropy mask selects no nodes");
  if (exec.kind == StrategyKind::kSingleWorker) {
    if (exec.workers != 1) throw ConfigError("single-worker strategy runs with p=1");
    return precision == Precision::kSingle
               ? single_worker_pass<float>(model, g, x, labels, grads)
               : single_worker_pass<double>(model, g, x, labels, grads);
  }
  if (precision != Precision::kDouble) {
    throw ConfigError("distributed strategies run in double precision only");
  }
  return distributed_pass(model, g, x, labels, exec, grads);
}

void apply_gradients(GraphTransformer& model, const ModelGradients& grads, double lr) {
  if (grads.layers.size() != model.layers.size()) throw ShapeError("gradient layer count mismatch");
  auto step = [lr](Matrix& w, const Matrix& dw) {
    if (w.rows() != dw.rows() || w.cols() != dw.cols()) throw ShapeError("gradient shape mismatch");
    auto wv = w.values();
    auto gv = dw.values();
    for (std::size_t i = 0; i < wv.size(); ++i) wv[i] -= lr * gv[i];
  };
  for (std::size_t l = 0; l < model.layers.size(); ++l) {
    step(model.layers[l].w_q, grads.layers[l].w_q);
    step(model.layers[l].w_k, grads.layers[l].w_k);
    step(model.layers[l].w_v, grads.layers[l].w_v);
    step(model.layers[l].w_o, grads.layers[l].w_o);
  }
  step(model.classifier, grads.classifier);
}

double train_step(GraphTransformer& model, const CsrGraph& g, const Matrix& x,
                  const NodeLabels& labels, const TrainConfig& cfg, Execution exec) {
  cfg.validate();
  ModelGradients grads;
  const double loss = loss_and_gradients(model, g, x, labels, exec, grads, cfg.precision);
  apply_gradients(model, grads, cfg.lr);
  return loss;
}

std::vector<double> train(GraphTransformer& model, const CsrGraph& g, const Matrix& x,
                          const NodeLabels& labels, const TrainConfig& cfg, Execution exec) {
  cfg.validate();
  std::vector<double> losses;
  losses.reserve(static_cast<std::size_t>(cfg.steps));
  for (int s = 0; s < cfg.steps; ++s) losses.push_back(train_step(model, g, x, labels, cfg, exec));
  return losses;
}

void write_loss_log(std::ostream& os, std::span<const double> losses) {
  os << "step,loss\n";
  const auto old_precision = os.precision(17);
  for (std::size_t s = 0; s < losses.size(); ++s) os << s << ',' << losses[s] << '\n';
  os.precision(old_precision);
}

namespace {

void write_matrix(std::ostream& os, const Matrix& m) {
  detail::write_pod<std::int64_t>(os, m.rows());
  detail::write_pod<std::int64_t>(os, m.cols());
  os.write(reinterpret_cast<const char*>(m.values().data()),
           static_cast<std::streamsize>(m.values().size_bytes()));
}

Matrix read_matrix(std::istream& is, Index rows, Index cols) {
  const auto r = detail::read_pod<std::int64_t>(is, "matrix rows");
  const auto c = detail::read_pod<std::int64_t>(is, "matrix cols");
  if (r != rows || c != cols) {
    throw IoError("checkpoint matrix is " + std::to_string(r) + "x" + std::to_string(c) +
                  ", expected " + std::to_string(rows) + "x" + std::to_string(cols));
  }
  std::vector<double> data(static_cast<std::size_t>(r * c));
  if (!is.read(reinterpret_cast<char*>(data.data()),
               static_cast<std::streamsize>(data.size() * sizeof(double)))) {
    throw IoError("truncated checkpoint matrix data");
  }
  return Matrix(r, c, std::move(data));
}

}  // namespace

void save_checkpoint(std::ostream& os, const GraphTransformer& model) {
  model.validate();
  detail::write_magic(os, kCheckpointMagic);
  detail::write_pod<std::uint64_t>(os, kCheckpointVersion);
  detail::write_pod<std::uint64_t>(os, static_cast<std::uint64_t>(model.hidden));
  detail::write_pod<std::uint64_t>(os, static_cast<std::uint64_t>(model.heads));
  detail::write_pod<std::uint64_t>(os, static_cast<std::uint64_t>(model.classes));
  detail::write_pod<std::uint64_t>(os, model.layers.size());
  for (const auto& w : model.layers) {
    write_matrix(os, w.w_q);
    write_matrix(os, w.w_k);
    write_matrix(os, w.w_v);
    write_matrix(os, w.w_o);
  }
  write_matrix(os, model.classifier);
  if (!os) throw IoError("failed to write checkpoint");
}

GraphTransformer load_checkpoint(std::istream& is) {
  detail::expect_magic(is, kCheckpointMagic);
  const auto version = detail::read_pod<std::uint64_t>(is, "checkpoint version");
  if (version != kCheckpointVersion) {
    throw IoError("unsupported checkpoint version " + std::to_string(version));
  }
  GraphTransformer m;
  m.hidden = static_cast<Index>(detail::read_pod<std::uint64_t>(is, "hidden"));
  m.heads = static_cast<Index>(detail::read_pod<std::uint64_t>(is, "heads"));
  m.classes = static_cast<Index>(detail::read_pod<std::uint64_t>(is, "classes"));
  const auto layers = detail::read_pod<std::uint64_t>(is, "layer count");
  if (m.hidden <= 0 || m.heads <= 0 || m.classes <= 0 || layers == 0 || layers > (1u << 20)) {
    throw IoError("checkpoint header has invalid dimensions");
  }
  for (std::uint64_t l = 0; l < layers; ++l) {
    SgaWeights w;
    w.w_q = read_matrix(is, m.hidden, m.hidden);
    w.w_k = read_matrix(is, m.hidden, m.hidden);
    w.w_v = read_matrix(is, m.hidden, m.hidden);
    w.w_o = read_matrix(is, m.hidden, m.hidden);
    m.layers.push_back(std::move(w));
  }
  m.classifier = read_matrix(is, m.hidden, m.classes);
  try {
    m.validate();
  } catch (const Error& e) {
    throw IoError(std::string("checkpoint content invalid: ") + e.what());
  }
  return m;
}

void save_checkpoint(const std::string& path, const GraphTransformer& model) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open '" + path + "' for writing");
  save_checkpoint(os, model);
}

GraphTransformer load_checkpoint(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open '" + path + "'");
  return load_checkpoint(is);
}

}  // namespace gtpar
