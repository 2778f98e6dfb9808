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

#include <cmath>

#include "gtpar/csr_graph.hpp"
#include "gtpar/dense.hpp"
#include "gtpar/sparse_ops.hpp"

namespace gtpar {

// Projection weights of one sparse graph attention block, all d x d.
// Output is X·W_o + softmax-attention(X·W_Q, X·W_K)·(X·W_V).
template <typename T>
struct BasicSgaWeights {
  DenseMatrix<T> w_q;
  DenseMatrix<T> w_k;
  DenseMatrix<T> w_v;
  DenseMatrix<T> w_o;

  Index hidden() const { return w_q.rows(); }
};
using SgaWeights = BasicSgaWeights<double>;

// Gradients of one block; `x` is the gradient w.r.t. the block input.
template <typename T>
struct BasicSgaGradients {
  DenseMatrix<T> x;
  DenseMatrix<T> w_q;
  DenseMatrix<T> w_k;
  DenseMatrix<T> w_v;
  DenseMatrix<T> w_o;
};
using SgaGradients = BasicSgaGradients<double>;

// State retained by the forward pass. Softmax output U suffices for the
// softmax gradient, so Z is not kept.
template <typename T>
struct BasicSgaCache {
  const CsrGraph* graph = nullptr;
  BasicSgaWeights<T> weights;
  DenseMatrix<T> x;
  HeadedMatrix<T> q;
  HeadedMatrix<T> k;
  HeadedMatrix<T> v;
  EdgeValues<T> u;

  bool valid() const { return graph != nullptr; }
};
using SgaCache = BasicSgaCache<double>;

template <typename T>
struct BasicSgaForward {
  DenseMatrix<T> out;
  BasicSgaCache<T> cache;
};
using SgaForward = BasicSgaForward<double>;

// Attention temperature: square root of the full hidden dimension, shared by
// every head.
template <typename T>
T attention_scale(Index hidden) {
  return std::sqrt(static_cast<T>(hidden));
}

// Throws ShapeError unless weights are d x d, x is N x d and heads divides d.
template <typename T>
void check_sga_shapes(const DenseMatrix<T>& x, const CsrGraph& g, const BasicSgaWeights<T>& w,
                      Index heads);

template <typename T>
BasicSgaForward<T> sga_forward(const DenseMatrix<T>& x, const CsrGraph& g,
                               const BasicSgaWeights<T>& weights, Index heads);

template <typename T>
BasicSgaGradients<T> sga_backward(const DenseMatrix<T>& grad_out, const BasicSgaCache<T>& cache);

// Per-node reference: evaluates each node's attention sum with explicit loops
// and no shared kernels. Used only to check sga_forward.
template <typename T>
DenseMatrix<T> sga_oracle(const DenseMatrix<T>& x, const CsrGraph& g,
                          const BasicSgaWeights<T>& weights, Index heads);

// Gradients of the attention core w.r.t. its Q, K, V operands. q has one row
// per pattern row, k and v one row per pattern column. Runs 3 SpMM and
// 1 SDDMM.
template <typename T>
struct AttentionGradients {
  HeadedMatrix<T> q;
  HeadedMatrix<T> k;
  HeadedMatrix<T> v;
};

template <typename T>
AttentionGradients<T> attention_backward(const CsrGraph& g, const HeadedMatrix<T>& q,
                                         const HeadedMatrix<T>& k, const HeadedMatrix<T>& v,
                                         const EdgeValues<T>& u, const HeadedMatrix<T>& grad_y,
                                         T scale);

}  // namespace gtpar
