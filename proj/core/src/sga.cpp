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

#include "gtpar/sga.hpp"

#include <string>

namespace gtpar {

namespace {

template <typename T>
void require_finite(const DenseMatrix<T>& m, const char* what) {
  if (!all_finite(m.values())) throw NumericError(std::string(what) + " produced a non-finite value");
}

template <typename T>
HeadedMatrix<T> headed_copy(const DenseMatrix<T>& m, Index heads) {
  DenseMatrix<T> copy = m;
  return HeadedMatrix<T>(std::move(copy), heads);
}

}  // namespace

template <typename T>
void check_sga_shapes(const DenseMatrix<T>& x, const CsrGraph& g, const BasicSgaWeights<T>& w,
                      Index heads) {
  const Index d = x.cols();
  if (x.rows() != g.num_rows()) {
    throw ShapeError("sga: feature rows " + std::to_string(x.rows()) + " != graph rows " +
                     std::to_string(g.num_rows()));
  }
  for (const DenseMatrix<T>* m : {&w.w_q, &w.w_k, &w.w_v, &w.w_o}) {
    if (m->rows() != d || m->cols() != d) {
      throw ShapeError("sga: weights must be " + std::to_string(d) + "x" + std::to_string(d));
    }
  }
  if (heads <= 0 || d % heads != 0) {
    throw ShapeError("sga: " + std::to_string(heads) + " heads do not divide hidden dimension " +
                     std::to_string(d));
  }
}

template <typename T>
BasicSgaForward<T> sga_forward(const DenseMatrix<T>& x, const CsrGraph& g,
                               const BasicSgaWeights<T>& weights, Index heads) {
  if (!g.is_square()) throw ShapeError("sga_forward: graph must be square");
  check_sga_shapes(x, g, weights, heads);
  const T scale = attention_scale<T>(x.cols());

  BasicSgaCache<T> cache;
  cache.graph = &g;
  cache.weights = weights;
  cache.x = x;
  cache.q = HeadedMatrix<T>(matmul(x, weights.w_q), heads);
  cache.k = HeadedMatrix<T>(matmul(x, weights.w_k), heads);
  cache.v = HeadedMatrix<T>(matmul(x, weights.w_v), heads);

  EdgeValues<T> z = sddmm(g, cache.q, cache.k);
  cache.u = edge_softmax(z, scale);
  DenseMatrix<T> y = spmm(cache.u, cache.v).to_dense();

  DenseMatrix<T> out = matmul(x, weights.w_o);
  add_inplace(out, y);
  require_finite(out, "sga_forward");
  return {std::move(out), std::move(cache)};
}

template <typename T>
AttentionGradients<T> attention_backward(const CsrGraph& g, const HeadedMatrix<T>& q,
                                         const HeadedMatrix<T>& k, const HeadedMatrix<T>& v,
                                         const EdgeValues<T>& u, const HeadedMatrix<T>& grad_y,
                                         T scale) {
  const CsrTranspose gt = transpose_csr(g);

  // Y = U·V
  EdgeValues<T> grad_u = sddmm(g, grad_y, v);
  HeadedMatrix<T> grad_v = spmm(transpose_values(u, gt), grad_y);

  // U = softmax(Z / scale), Z = (Q·Kᵀ) masked by the pattern
  EdgeValues<T> grad_z = edge_softmax_backward(u, grad_u, scale);
  HeadedMatrix<T> grad_q = spmm(grad_z, k);
  HeadedMatrix<T> grad_k = spmm(transpose_values(grad_z, gt), q);
  return {std::move(grad_q), std::move(grad_k), std::move(grad_v)};
}

template <typename T>
BasicSgaGradients<T> sga_backward(const DenseMatrix<T>& grad_out, const BasicSgaCache<T>& cache) {
  if (!cache.valid()) throw StateError("sga_backward: cache is empty");
  if (grad_out.rows() != cache.x.rows() || grad_out.cols() != cache.x.cols()) {
    throw StateError("sga_backward: gradient shape does not match cached forward");
  }
  const CsrGraph& g = *cache.graph;
  const BasicSgaWeights<T>& w = cache.weights;
  const Index heads = cache.q.heads();
  const T scale = attention_scale<T>(cache.x.cols());

  AttentionGradients<T> attn =
      attention_backward(g, cache.q, cache.k, cache.v, cache.u, headed_copy(grad_out, heads), scale);

  BasicSgaGradients<T> grads;
  DenseMatrix<T> dq = std::move(attn.q).to_dense();
  DenseMatrix<T> dk = std::move(attn.k).to_dense();
  DenseMatrix<T> dv = std::move(attn.v).to_dense();
  grads.w_o = matmul_tn(cache.x, grad_out);
  grads.w_q = matmul_tn(cache.x, dq);
  grads.w_k = matmul_tn(cache.x, dk);
  grads.w_v = matmul_tn(cache.x, dv);
  grads.x = matmul_nt(grad_out, w.w_o);
  add_inplace(grads.x, matmul_nt(dq, w.w_q));
  add_inplace(grads.x, matmul_nt(dk, w.w_k));
  add_inplace(grads.x, matmul_nt(dv, w.w_v));
  for (const DenseMatrix<T>* m : {&grads.x, &grads.w_q, &grads.w_k, &grads.w_v, &grads.w_o}) {
    require_finite(*m, "sga_backward");
  }
  return grads;
}

#define GTPAR_INSTANTIATE_SGA(T)                                                                \
  template void check_sga_shapes(const DenseMatrix<T>&, const CsrGraph&,                       \
                                 const BasicSgaWeights<T>&, Index);                            \
  template BasicSgaForward<T> sga_forward(const DenseMatrix<T>&, const CsrGraph&,              \
                                          const BasicSgaWeights<T>&, Index);                   \
  template BasicSgaGradients<T> sga_backward(const DenseMatrix<T>&, const BasicSgaCache<T>&);  \
  template AttentionGradients<T> attention_backward(                                           \
      const CsrGraph&, const HeadedMatrix<T>&, const HeadedMatrix<T>&, const HeadedMatrix<T>&, \
      const EdgeValues<T>&, const HeadedMatrix<T>&, T);

GTPAR_INSTANTIATE_SGA(float)
GTPAR_INSTANTIATE_SGA(double)

#undef GTPAR_INSTANTIATE_SGA

}  // namespace gtpar
