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
#include <vector>

#include "gtpar/csr_graph.hpp"
#include "gtpar/dense.hpp"

namespace gtpar {

// One scalar per (nonzero, head), laid out [E][heads] in the graph's CSR
// order. Holds a non-owning reference to its pattern; the graph must outlive
// the values.
template <typename T>
class EdgeValues {
 public:
  EdgeValues() = default;
  EdgeValues(const CsrGraph& graph, Index heads)
      : graph_(&graph), heads_(heads),
        data_(static_cast<std::size_t>(graph.num_edges() * heads), T{0}) {
    if (heads <= 0) throw ShapeError("edge values need at least one head");
  }
  EdgeValues(const CsrGraph& graph, Index heads, std::vector<T> data)
      : graph_(&graph), heads_(heads), data_(std::move(data)) {
    if (heads <= 0 || static_cast<Index>(data_.size()) != graph.num_edges() * heads) {
      throw ShapeError("edge values length does not match E x heads");
    }
  }

  const CsrGraph& graph() const { return *graph_; }
  bool has_graph() const { return graph_ != nullptr; }
  Index heads() const { return heads_; }
  Index num_edges() const { return graph_ ? graph_->num_edges() : 0; }
  Index size() const { return static_cast<Index>(data_.size()); }

  T& at(Index edge, Index head) { return data_[static_cast<std::size_t>(edge * heads_ + head)]; }
  T at(Index edge, Index head) const {
    return data_[static_cast<std::size_t>(edge * heads_ + head)];
  }

  std::span<T> values() { return data_; }
  std::span<const T> values() const { return data_; }

 private:
  const CsrGraph* graph_ = nullptr;
  Index heads_ = 1;
  std::vector<T> data_;
};

// out[e][t] = <q[i][t], k[j][t]> for every nonzero e = (i, j). q has one row
// per graph row, k one row per graph column.
template <typename T>
EdgeValues<T> sddmm(const CsrGraph& g, const HeadedMatrix<T>& q, const HeadedMatrix<T>& k);

// Softmax of z / scale over each row's nonzeros, independently per head.
// Subtracts the row-head maximum first; empty rows produce nothing.
template <typename T>
EdgeValues<T> edge_softmax(const EdgeValues<T>& z, T scale);

// Gradient of edge_softmax given its output u and the upstream gradient du:
// u * (du - <du, u>_row) / scale.
template <typename T>
EdgeValues<T> edge_softmax_backward(const EdgeValues<T>& u, const EdgeValues<T>& du, T scale);

// out[i][t] = sum over nonzeros e = (i, j) of u[e][t] * v[j][t].
template <typename T>
HeadedMatrix<T> spmm(const EdgeValues<T>& u, const HeadedMatrix<T>& v);

// Moves values onto the transposed pattern `t.graph`.
template <typename T>
EdgeValues<T> transpose_values(const EdgeValues<T>& u, const CsrTranspose& t);

}  // namespace gtpar
