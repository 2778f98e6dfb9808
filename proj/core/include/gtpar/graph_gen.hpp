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
#include <string_view>

#include "gtpar/csr_graph.hpp"

namespace gtpar {

enum class GraphKind { kErdosRenyi, kPowerLaw };

// Accepts "erdos-renyi" and "power-law".
GraphKind parse_graph_kind(std::string_view name);

// Directed G(n, q) without self-loops, q = avg_degree / (n - 1), so the
// expected edge count is n * avg_degree.
CsrGraph generate_erdos_renyi(Index n, double avg_degree, std::uint64_t seed);

// Directed Chung-Lu graph without self-loops: expected degrees follow a power
// law with the given exponent and average avg_degree (before capping edge
// probabilities at 1).
CsrGraph generate_power_law(Index n, double avg_degree, std::uint64_t seed, double exponent = 2.5);

CsrGraph generate_graph(GraphKind kind, Index n, double avg_degree, std::uint64_t seed);

struct DegreeStats {
  Index nodes = 0;
  Index edges = 0;
  Index max_degree = 0;
  double avg_degree = 0.0;
};

DegreeStats degree_stats(const CsrGraph& g);

}  // namespace gtpar
