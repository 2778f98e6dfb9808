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

#include "gtpar/graph_gen.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "gtpar/errors.hpp"
#include "gtpar/random.hpp"

namespace gtpar {

namespace {

void check_params(Index n, double avg_degree) {
  if (n < 1) throw ArgumentError("graph needs n >= 1");
  if (!(avg_degree >= 0.0) || !std::isfinite(avg_degree)) {
    throw ArgumentError("average degree must be finite and >= 0");
  }
}

// Number of failures before the next success of a Bernoulli(q) sequence.
Index geometric_skip(Rng& rng, double log_1mq) {
  const double u = 1.0 - rng.unit();  // (0, 1]
  return static_cast<Index>(std::floor(std::log(u) / log_1mq));
}

}  // namespace

GraphKind parse_graph_kind(std::string_view name) {
  if (name == "erdos-renyi") return GraphKind::kErdosRenyi;
  if (name == "power-law") return GraphKind::kPowerLaw;
  throw ArgumentError("unknown graph kind '" + std::string(name) + "'");
}

CsrGraph generate_erdos_renyi(Index n, double avg_degree, std::uint64_t seed) {
  check_params(n, avg_degree);
  std::vector<Edge> edges;
  if (n < 2 || avg_degree == 0.0) return CsrGraph::from_edges(n, edges);
  const Index per_row = n - 1;
  const Index total = n * per_row;
  const double q = std::min(1.0, avg_degree / static_cast<double>(per_row));
  edges.reserve(static_cast<std::size_t>(static_cast<double>(total) * q * 1.1) + 16);
  Rng rng(seed);
  auto emit = [&](Index k) {
    const Index row = k / per_row;
    const Index c = k % per_row;
    edges.emplace_back(row, c >= row ? c + 1 : c);
  };
  if (q >= 1.0) {
    for (Index k = 0; k < total; ++k) emit(k);
  } else {
    // Walk the n(n-1) ordered pairs, jumping straight to each success.
    const double log_1mq = std::log1p(-q);
    for (Index k = geometric_skip(rng, log_1mq); k < total; k += 1 + geometric_skip(rng, log_1mq)) {
      emit(k);
    }
  }
  return CsrGraph::from_edges(n, edges);
}

CsrGraph generate_power_law(Index n, double avg_degree, std::uint64_t seed, double exponent) {
  check_params(n, avg_degree);
  if (!(exponent > 2.0)) throw ArgumentError("power-law exponent must exceed 2");
  std::vector<Edge> edges;
  if (n < 2 || avg_degree == 0.0) return CsrGraph::from_edges(n, edges);

  // Expected degrees w_i ∝ (i + 1)^(-1/(exponent - 1)), nonincreasing in i.
  std::vector<double> w(static_cast<std::size_t>(n));
  const double power = -1.0 / (exponent - 1.0);
  double sum = 0.0;
  for (Index i = 0; i < n; ++i) {
    w[static_cast<std::size_t>(i)] = std::pow(static_cast<double>(i + 1), power);
    sum += w[static_cast<std::size_t>(i)];
  }
  const double target = avg_degree * static_cast<double>(n);
  for (double& v : w) v *= target / sum;
  const double total = target;

  // Chung-Lu with skipping over sorted weights: pair (u, v) is an edge with
  // probability min(1, w_u w_v / S).
  Rng rng(seed);
  for (Index u = 0; u < n; ++u) {
    const double wu = w[static_cast<std::size_t>(u)];
    Index v = 0;
    double p = std::min(1.0, wu * w[0] / total);
    while (v < n && p > 0.0) {
      if (p < 1.0) v += geometric_skip(rng, std::log1p(-p));
      if (v >= n) break;
      const double q = std::min(1.0, wu * w[static_cast<std::size_t>(v)] / total);
      if (rng.unit() < q / p && v != u) edges.emplace_back(u, v);
      p = q;
      ++v;
    }
  }
  return CsrGraph::from_edges(n, edges);
}

CsrGraph generate_graph(GraphKind kind, Index n, double avg_degree, std::uint64_t seed) {
  return kind == GraphKind::kErdosRenyi ? generate_erdos_renyi(n, avg_degree, seed)
                                        : generate_power_law(n, avg_degree, seed);
}

DegreeStats degree_stats(const CsrGraph& g) {
  DegreeStats s;
  s.nodes = g.num_nodes();
  s.edges = g.num_edges();
  for (Index r = 0; r < g.num_rows(); ++r) s.max_degree = std::max(s.max_degree, g.degree(r));
  s.avg_degree = s.nodes > 0 ? static_cast<double>(s.edges) / static_cast<double>(s.nodes) : 0.0;
  return s;
}

}  // namespace gtpar
