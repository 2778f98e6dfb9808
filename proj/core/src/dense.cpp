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

#include "gtpar/dense.hpp"

#include "gtpar/kernel_census.hpp"

namespace gtpar {

namespace {

std::string dims(Index r, Index c) { return std::to_string(r) + "x" + std::to_string(c); }

}  // namespace

KernelCounts& thread_kernel_counts() {
  thread_local KernelCounts counts;
  return counts;
}

template <typename T>
DenseMatrix<T> matmul(const DenseMatrix<T>& a, const DenseMatrix<T>& b) {
  if (a.cols() != b.rows()) {
    throw ShapeError("matmul: " + dims(a.rows(), a.cols()) + " x " + dims(b.rows(), b.cols()));
  }
  ++thread_kernel_counts().mm;
  DenseMatrix<T> out(a.rows(), b.cols());
  for (Index i = 0; i < a.rows(); ++i) {
    auto out_row = out.row(i);
    for (Index k = 0; k < a.cols(); ++k) {
      const T aik = a(i, k);
      auto b_row = b.row(k);
      for (Index j = 0; j < b.cols(); ++j) out_row[j] += aik * b_row[j];
    }
  }
  return out;
}

template <typename T>
DenseMatrix<T> matmul_tn(const DenseMatrix<T>& a, const DenseMatrix<T>& b) {
  if (a.rows() != b.rows()) {
    throw ShapeError("matmul_tn: " + dims(a.rows(), a.cols()) + "^T x " +
                     dims(b.rows(), b.cols()));
  }
  ++thread_kernel_counts().mm;
  DenseMatrix<T> out(a.cols(), b.cols());
  for (Index k = 0; k < a.rows(); ++k) {
    auto a_row = a.row(k);
    auto b_row = b.row(k);
    for (Index i = 0; i < a.cols(); ++i) {
      const T aki = a_row[i];
      auto out_row = out.row(i);
      for (Index j = 0; j < b.cols(); ++j) out_row[j] += aki * b_row[j];
    }
  }
  return out;
}

template <typename T>
DenseMatrix<T> matmul_nt(const DenseMatrix<T>& a, const DenseMatrix<T>& b) {
  if (a.cols() != b.cols()) {
    throw ShapeError("matmul_nt: " + dims(a.rows(), a.cols()) + " x " +
                     dims(b.rows(), b.cols()) + "^T");
  }
  ++thread_kernel_counts().mm;
  DenseMatrix<T> out(a.rows(), b.rows());
  for (Index i = 0; i < a.rows(); ++i) {
    auto a_row = a.row(i);
    for (Index j = 0; j < b.rows(); ++j) {
      auto b_row = b.row(j);
      T acc{0};
      for (Index k = 0; k < a.cols(); ++k) acc += a_row[k] * b_row[k];
      out(i, j) = acc;
    }
  }
  return out;
}

template <typename T>
void add_inplace(DenseMatrix<T>& acc, const DenseMatrix<T>& x) {
  if (acc.rows() != x.rows() || acc.cols() != x.cols()) {
    throw ShapeError("add: " + dims(acc.rows(), acc.cols()) + " + " + dims(x.rows(), x.cols()));
  }
  auto dst = acc.values();
  auto src = x.values();
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
}

template <typename T>
DenseMatrix<T> slice_rows(const DenseMatrix<T>& m, Index begin, Index end) {
  if (begin < 0 || end < begin || end > m.rows()) throw ShapeError("slice_rows out of range");
  auto vals = m.values();
  std::vector<T> out(vals.begin() + begin * m.cols(), vals.begin() + end * m.cols());
  return DenseMatrix<T>(end - begin, m.cols(), std::move(out));
}

template <typename T>
DenseMatrix<T> concat_rows(std::span<const DenseMatrix<T>> parts) {
  if (parts.empty()) return {};
  Index cols = parts.front().cols();
  Index rows = 0;
  for (const auto& p : parts) {
    if (p.cols() != cols) throw ShapeError("concat_rows: column mismatch");
    rows += p.rows();
  }
  std::vector<T> out;
  out.reserve(static_cast<std::size_t>(rows * cols));
  for (const auto& p : parts) out.insert(out.end(), p.values().begin(), p.values().end());
  return DenseMatrix<T>(rows, cols, std::move(out));
}

template <typename T>
DenseMatrix<T> slice_cols(const DenseMatrix<T>& m, Index begin, Index end) {
  if (begin < 0 || end < begin || end > m.cols()) throw ShapeError("slice_cols out of range");
  DenseMatrix<T> out(m.rows(), end - begin);
  for (Index r = 0; r < m.rows(); ++r) {
    auto src = m.row(r);
    std::copy(src.begin() + begin, src.begin() + end, out.row(r).begin());
  }
  return out;
}

template <typename T>
DenseMatrix<T> concat_cols(std::span<const DenseMatrix<T>> parts) {
  if (parts.empty()) return {};
  Index rows = parts.front().rows();
  Index cols = 0;
  for (const auto& p : parts) {
    if (p.rows() != rows) throw ShapeError("concat_cols: row mismatch");
    cols += p.cols();
  }
  DenseMatrix<T> out(rows, cols);
  for (Index r = 0; r < rows; ++r) {
    auto dst = out.row(r).begin();
    for (const auto& p : parts) dst = std::copy(p.row(r).begin(), p.row(r).end(), dst);
  }
  return out;
}

#define GTPAR_INSTANTIATE_DENSE(T)                                                        \
  template DenseMatrix<T> matmul(const DenseMatrix<T>&, const DenseMatrix<T>&);           \
  template DenseMatrix<T> matmul_tn(const DenseMatrix<T>&, const DenseMatrix<T>&);        \
  template DenseMatrix<T> matmul_nt(const DenseMatrix<T>&, const DenseMatrix<T>&);        \
  template void add_inplace(DenseMatrix<T>&, const DenseMatrix<T>&);                      \
  template DenseMatrix<T> slice_rows(const DenseMatrix<T>&, Index, Index);                \
  template DenseMatrix<T> concat_rows(std::span<const DenseMatrix<T>>);                   \
  template DenseMatrix<T> slice_cols(const DenseMatrix<T>&, Index, Index);                \
  template DenseMatrix<T> concat_cols(std::span<const DenseMatrix<T>>);

GTPAR_INSTANTIATE_DENSE(float)
GTPAR_INSTANTIATE_DENSE(double)

#undef GTPAR_INSTANTIATE_DENSE

}  // namespace gtpar
