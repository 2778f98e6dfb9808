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

// Direct per-node evaluation of
//   x'_i = x_i W_o + sum_{j in N(i)} alpha_ij (x_j W_V)
//   alpha_ij = softmax_j( (x_i W_Q)·(x_j W_K) / sqrt(d) )
// with each head's slice of the projections handled separately. Deliberately
// shares no kernels with sga_forward.

#include <cmath>
#include <vector>

#include "gtpar/sga.hpp"

namespace gtpar {

namespace {

template <typename T>
T projected(const DenseMatrix<T>& x, Index node, const DenseMatrix<T>& w, Index col) {
  T acc{0};
  for (Index a = 0; a < x.cols(); ++a) acc += x(node, a) * w(a, col);
  return acc;
}

}  // namespace

template <typename T>
DenseMatrix<T> sga_oracle(const DenseMatrix<T>& x, const CsrGraph& g,
                          const BasicSgaWeights<T>& weights, Index heads) {
  check_sga_shapes(x, g, weights, heads);
  const Index n = x.rows();
  const Index d = x.cols();
  const Index dh = d / heads;
  const T root_d = std::sqrt(static_cast<T>(d));
  DenseMatrix<T> out(n, d);

  for (Index i = 0; i < n; ++i) {
    for (Index c = 0; c < d; ++c) out(i, c) = projected(x, i, weights.w_o, c);

    std::vector<Index> nbrs;
    for (Index e = g.row_ptr()[static_cast<std::size_t>(i)];
         e < g.row_ptr()[static_cast<std::size_t>(i) + 1]; ++e) {
      nbrs.push_back(g.col_idx()[static_cast<std::size_t>(e)]);
    }
    if (nbrs.empty()) continue;

    for (Index t = 0; t < heads; ++t) {
      std::vector<T> score(nbrs.size());
      for (std::size_t a = 0; a < nbrs.size(); ++a) {
        T s{0};
        for (Index c = t * dh; c < (t + 1) * dh; ++c) {
          s += projected(x, i, weights.w_q, c) * projected(x, nbrs[a], weights.w_k, c);
        }
        score[a] = s / root_d;
      }
      T hi = score[0];
      for (T s : score) hi = s > hi ? s : hi;
      T total{0};
      for (T& s : score) {
        s = std::exp(s - hi);
        total += s;
      }
      for (std::size_t a = 0; a < nbrs.size(); ++a) {
        const T alpha = score[a] / total;
        for (Index c = t * dh; c < (t + 1) * dh; ++c) {
          out(i, c) += alpha * projected(x, nbrs[a], weights.w_v, c);
        }
      }
    }
  }
  return out;
}

template DenseMatrix<float> sga_oracle(const DenseMatrix<float>&, const CsrGraph&,
                                       const BasicSgaWeights<float>&, Index);
template DenseMatrix<double> sga_oracle(const DenseMatrix<double>&, const CsrGraph&,
                                        const BasicSgaWeights<double>&, Index);

}  // namespace gtpar
