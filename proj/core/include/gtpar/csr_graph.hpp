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

#include <span>
#include <utility>
#include <vector>

#include "gtpar/types.hpp"

namespace gtpar {

using Edge = std::pair<Index, Index>;

// Adjacency pattern in canonical compressed-sparse-row form: row_ptr has
// num_rows + 1 entries, columns within a row are strictly increasing.
// Usually square (num_rows == num_cols == N); a worker's row block of the
// full graph keeps the global column space and is rectangular.
class CsrGraph {
 public:
  CsrGraph() : row_ptr_{0} {}
  // Throws DataError when the arrays violate the canonical-form invariants.
  CsrGraph(Index num_rows, Index num_cols, std::vector<Index> row_ptr, std::vector<Index> col_idx);

  // Builds a canonical N x N pattern; rejects out-of-range ids and duplicates.
  static CsrGraph from_edges(Index num_nodes, std::span<const Edge> edges);

  Index num_rows() const { return num_rows_; }
  Index num_cols() const { return num_cols_; }
  Index num_nodes() const { return num_rows_; }
  Index num_edges() const { return static_cast<Index>(col_idx_.size()); }
  bool is_square() const { return num_rows_ == num_cols_; }

  std::span<const Index> row_ptr() const { return row_ptr_; }
  std::span<const Index> col_idx() const { return col_idx_; }

  Index row_begin(Index row) const { return row_ptr_[static_cast<std::size_t>(row)]; }
  Index row_end(Index row) const { return row_ptr_[static_cast<std::size_t>(row) + 1]; }
  Index degree(Index row) const { return row_end(row) - row_begin(row); }
  std::span<const Index> neighbors(Index row) const {
    return std::span<const Index>(col_idx_).subspan(static_cast<std::size_t>(row_begin(row)),
                                                    static_cast<std::size_t>(degree(row)));
  }

  std::vector<Edge> edges() const;

  friend bool operator==(const CsrGraph&, const CsrGraph&) = default;

 private:
  Index num_rows_ = 0;
  Index num_cols_ = 0;
  std::vector<Index> row_ptr_;
  std::vector<Index> col_idx_;
};

struct CsrTranspose {
  CsrGraph graph;
  // permutation[e] is the position of original nonzero e in `graph`.
  std::vector<Index> permutation;
};

CsrTranspose transpose_csr(const CsrGraph& g);

}  // namespace gtpar
