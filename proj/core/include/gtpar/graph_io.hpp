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
#include <string>
#include <string_view>
#include <vector>

#include "gtpar/csr_graph.hpp"

namespace gtpar {

enum class GraphFormat { kEdgeList, kBinCsr };

// Accepts "edgelist" and "bincsr". Throws ArgumentError otherwise.
GraphFormat parse_graph_format(std::string_view name);

struct EdgeListOptions {
  // Add the reverse of every edge; the union is deduplicated.
  bool symmetrize = false;
  // Map the sorted set of ids that occur to 0..N'-1.
  bool relabel = false;
  // Read each line as `dst src`.
  bool transpose = false;
};

// Text edge list: one `src dst` pair per line, 0-based ids, `#` comments.
// A `# nodes N` comment fixes the node count; otherwise N is max id + 1.
// Duplicate edges are rejected with the offending line number (DataError).
// When relabelling, original_ids (if given) receives the id of each new node.
CsrGraph read_edge_list(std::istream& is, const EdgeListOptions& options = {},
                        std::vector<Index>* original_ids = nullptr);
void write_edge_list(std::ostream& os, const CsrGraph& g);

// Binary CSR: "CSRGRAPH", u64 version (1), i64 N, i64 E, row_ptr (N+1 x i64),
// col_idx (E x i64), all little-endian.
CsrGraph read_bincsr(std::istream& is);
void write_bincsr(std::ostream& os, const CsrGraph& g);

// File variants; open failures raise IoError.
CsrGraph load_graph(const std::string& path, GraphFormat format, const EdgeListOptions& options = {});
void save_graph(const std::string& path, const CsrGraph& g, GraphFormat format);

// Node labels file: `node_id class_id` per line, `#` comments.
struct LabelEntry {
  Index node = 0;
  Index label = 0;
};
std::vector<LabelEntry> read_labels(std::istream& is);

}  // namespace gtpar
