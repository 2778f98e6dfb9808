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

#include "gtpar/csr_graph.hpp"

#include <algorithm>
#include <string>

#include "gtpar/errors.hpp"

namespace gtpar {

CsrGraph::CsrGraph(Index num_rows, Index num_cols, std::vector<Index> row_ptr,
                   std::vector<Index> col_idx)
    : num_rows_(num_rows), num_cols_(num_cols), row_ptr_(std::move(row_ptr)),
      col_idx_(std::move(col_idx)) {
  if (num_rows_ < 0 || num_cols_ < 0) throw DataError("csr: negative extent");
  if (static_cast<Index>(row_ptr_.size()) != num_rows_ + 1) {
    throw DataError("csr: row_ptr has " + std::to_string(row_ptr_.size()) + " entries, expected " +
                    std::to_string(num_rows_ + 1));
  }
  if (row_ptr_.front() != 0 || row_ptr_.back() != num_edges()) {
    throw DataError("csr: row_ptr must start at 0 and end at the edge count");
  }
  for (Index r = 0; r < num_rows_; ++r) {
    Index b = row_begin(r);
    Index e = row_end(r);
    if (e < b) throw DataError("csr: row_ptr decreases at row " + std::to_string(r));
    for (Index k = b; k < e; ++k) {
      Index c = col_idx_[static_cast<std::size_t>(k)];
      if (c < 0 || c >= num_cols_) {
        throw DataError("csr: column " + std::to_string(c) + " out of range in row " +
                        std::to_string(r));
      }
      if (k > b && col_idx_[static_cast<std::size_t>(k - 1)] >= c) {
        throw DataError("csr: row " + std::to_string(r) +
                        " columns not strictly increasing (duplicate or unsorted)");
      }
    }
  }
}

CsrGraph CsrGraph::from_edges(Index num_nodes, std::span<const Edge> edges) {
  if (num_nodes < 0) throw DataError("csr: negative node count");
  std::vector<Edge> sorted(edges.begin(), edges.end());
  for (const auto& [s, d] : sorted) {
    if (s < 0 || s >= num_nodes || d < 0 || d >= num_nodes) {
      throw DataError("csr: edge (" + std::to_string(s) + "," + std::to_string(d) +
                      ") outside [0, " + std::to_string(num_nodes) + ")");
    }
  }
  std::sort(sorted.begin(), sorted.end());
  auto dup = std::adjacent_find(sorted.begin(), sorted.end());
  if (dup != sorted.end()) {
    throw DataError("csr: duplicate edge (" + std::to_string(dup->first) + "," +
                    std::to_string(dup->second) + ")");
  }
  std::vector<Index> row_ptr(static_cast<std::size_t>(num_nodes) + 1, 0);
  std::vector<Index> col_idx;
  col_idx.reserve(sorted.size());
  for (const auto& [s, d] : sorted) {
    ++row_ptr[static_cast<std::size_t>(s) + 1];
    col_idx.push_back(d);
  }
  for (std::size_t i = 1; i < row_ptr.size(); ++i) row_ptr[i] += row_ptr[i - 1];
  return CsrGraph(num_nodes, num_nodes, std::move(row_ptr), std::move(col_idx));
}

std::vector<Edge> CsrGraph::edges() const {
  std::vector<Edge> out;
  out.reserve(col_idx_.size());
  for (Index r = 0; r < num_rows_; ++r) {
    for (Index c : neighbors(r)) out.emplace_back(r, c);
  }
  return out;
}

CsrTranspose transpose_csr(const CsrGraph& g) {
  const Index rows = g.num_cols();
  std::vector<Index> row_ptr(static_cast<std::size_t>(rows) + 1, 0);
  for (Index c : g.col_idx()) ++row_ptr[static_cast<std::size_t>(c) + 1];
  for (std::size_t i = 1; i < row_ptr.size(); ++i) row_ptr[i] += row_ptr[i - 1];

  // Scanning source rows in order keeps each transposed row sorted.
  std::vector<Index> cursor(row_ptr.begin(), row_ptr.end() - 1);
  std::vector<Index> col_idx(static_cast<std::size_t>(g.num_edges()));
  std::vector<Index> perm(static_cast<std::size_t>(g.num_edges()));
  for (Index r = 0; r < g.num_rows(); ++r) {
    for (Index e = g.row_begin(r); e < g.row_end(r); ++e) {
      Index c = g.col_idx()[static_cast<std::size_t>(e)];
      Index pos = cursor[static_cast<std::size_t>(c)]++;
      col_idx[static_cast<std::size_t>(pos)] = r;
      perm[static_cast<std::size_t>(e)] = pos;
    }
  }
  return {CsrGraph(rows, g.num_rows(), std::move(row_ptr), std::move(col_idx)), std::move(perm)};
}

}  // namespace gtpar
