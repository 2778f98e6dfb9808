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

#include "gtpar/sparse_ops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "gtpar/kernel_census.hpp"

namespace gtpar {

namespace {

template <typename T>
void check_heads(const HeadedMatrix<T>& a, const HeadedMatrix<T>& b, const char* op) {
  if (a.heads() != b.heads() || a.head_dim() != b.head_dim()) {
    throw ShapeError(std::string(op) + ": head layout mismatch (" + std::to_string(a.heads()) +
                     "x" + std::to_string(a.head_dim()) + " vs " + std::to_string(b.heads()) +
                     "x" + std::to_string(b.head_dim()) + ")");
  }
}

}  // namespace

template <typename T>
EdgeValues<T> sddmm(const CsrGraph& g, const HeadedMatrix<T>& q, const HeadedMatrix<T>& k) {
  if (q.rows() != g.num_rows() || k.rows() != g.num_cols()) {
    throw ShapeError("sddmm: operand rows " + std::to_string(q.rows()) + "/" +
                     std::to_string(k.rows()) + " do not match pattern " +
                     std::to_string(g.num_rows()) + "x" + std::to_string(g.num_cols()));
  }
  check_heads(q, k, "sddmm");
  ++thread_kernel_counts().sddmm;
  const Index heads = q.heads();
  EdgeValues<T> out(g, heads);
  for (Index i = 0; i < g.num_rows(); ++i) {
    for (Index e = g.row_begin(i); e < g.row_end(i); ++e) {
      const Index j = g.col_idx()[static_cast<std::size_t>(e)];
      for (Index t = 0; t < heads; ++t) {
        auto qi = q.at(i, t);
        auto kj = k.at(j, t);
        T acc{0};
        for (std::size_t c = 0; c < qi.size(); ++c) acc += qi[c] * kj[c];
        out.at(e, t) = acc;
      }
    }
  }
  return out;
}

template <typename T>
EdgeValues<T> edge_softmax(const EdgeValues<T>& z, T scale) {
  if (!(scale > T{0})) throw ArgumentError("edge_softmax: scale must be positive");
  const CsrGraph& g = z.graph();
  const Index heads = z.heads();
  EdgeValues<T> out(g, heads);
  for (Index i = 0; i < g.num_rows(); ++i) {
    const Index b = g.row_begin(i);
    const Index e_end = g.row_end(i);
    if (b == e_end) continue;
    for (Index t = 0; t < heads; ++t) {
      T peak = -std::numeric_limits<T>::infinity();
      for (Index e = b; e < e_end; ++e) peak = std::max(peak, z.at(e, t));
      T denom{0};
      for (Index e = b; e < e_end; ++e) {
        T w = std::exp((z.at(e, t) - peak) / scale);
        out.at(e, t) = w;
        denom += w;
      }
      for (Index e = b; e < e_end; ++e) out.at(e, t) /= denom;
    }
  }
  return out;
}

template <typename T>
EdgeValues<T> edge_softmax_backward(const EdgeValues<T>& u, const EdgeValues<T>& du, T scale) {
  if (!(scale > T{0})) throw ArgumentError("edge_softmax_backward: scale must be positive");
  if (&u.graph() != &du.graph() && !(u.graph() == du.graph())) {
    throw ShapeError("edge_softmax_backward: pattern mismatch");
  }
  if (u.heads() != du.heads()) throw ShapeError("edge_softmax_backward: head mismatch");
  const CsrGraph& g = u.graph();
  const Index heads = u.heads();
  EdgeValues<T> out(g, heads);
  for (Index i = 0; i < g.num_rows(); ++i) {
    const Index b = g.row_begin(i);
    const Index e_end = g.row_end(i);
    for (Index t = 0; t < heads; ++t) {
      T dot{0};
      for (Index e = b; e < e_end; ++e) dot += du.at(e, t) * u.at(e, t);
      for (Index e = b; e < e_end; ++e) out.at(e, t) = u.at(e, t) * (du.at(e, t) - dot) / scale;
    }
  }
  return out;
}

template <typename T>
HeadedMatrix<T> spmm(const EdgeValues<T>& u, const HeadedMatrix<T>& v) {
  const CsrGraph& g = u.graph();
  if (v.rows() != g.num_cols() || v.heads() != u.heads()) {
    throw ShapeError("spmm: dense operand " + std::to_string(v.rows()) + "x" +
                     std::to_string(v.heads()) + " heads does not match pattern columns " +
                     std::to_string(g.num_cols()) + " with " + std::to_string(u.heads()) +
                     " heads");
  }
  ++thread_kernel_counts().spmm;
  const Index heads = v.heads();
  HeadedMatrix<T> out(g.num_rows(), heads, v.head_dim());
  for (Index i = 0; i < g.num_rows(); ++i) {
    for (Index e = g.row_begin(i); e < g.row_end(i); ++e) {
      const Index j = g.col_idx()[static_cast<std::size_t>(e)];
      for (Index t = 0; t < heads; ++t) {
        const T w = u.at(e, t);
        auto dst = out.at(i, t);
        auto src = v.at(j, t);
        for (std::size_t c = 0; c < dst.size(); ++c) dst[c] += w * src[c];
      }
    }
  }
  return out;
}

template <typename T>
EdgeValues<T> transpose_values(const EdgeValues<T>& u, const CsrTranspose& t) {
  if (static_cast<Index>(t.permutation.size()) != u.num_edges()) {
    throw ShapeError("transpose_values: permutation length mismatch");
  }
  const Index heads = u.heads();
  EdgeValues<T> out(t.graph, heads);
  for (Index e = 0; e < u.num_edges(); ++e) {
    const Index dst = t.permutation[static_cast<std::size_t>(e)];
    for (Index h = 0; h < heads; ++h) out.at(dst, h) = u.at(e, h);
  }
  return out;
}

#define GTPAR_INSTANTIATE_SPARSE(T)                                                           \
  template EdgeValues<T> sddmm(const CsrGraph&, const HeadedMatrix<T>&, const HeadedMatrix<T>&); \
  template EdgeValues<T> edge_softmax(const EdgeValues<T>&, T);                               \
  template EdgeValues<T> edge_softmax_backward(const EdgeValues<T>&, const EdgeValues<T>&, T); \
  template HeadedMatrix<T> spmm(const EdgeValues<T>&, const HeadedMatrix<T>&);                \
  template EdgeValues<T> transpose_values(const EdgeValues<T>&, const CsrTranspose&);

GTPAR_INSTANTIATE_SPARSE(float)
GTPAR_INSTANTIATE_SPARSE(double)

#undef GTPAR_INSTANTIATE_SPARSE

}  // namespace gtpar
