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

#include <algorithm>
#include <cmath>
#include <initializer_list>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "gtpar/errors.hpp"
#include "gtpar/types.hpp"

namespace gtpar {

// Row-major dense matrix.
template <typename T>
class DenseMatrix {
 public:
  using value_type = T;

  DenseMatrix() = default;
  DenseMatrix(Index rows, Index cols) : rows_(rows), cols_(cols) {
    if (rows < 0 || cols < 0) throw ShapeError("negative matrix extent");
    data_.assign(static_cast<std::size_t>(rows * cols), T{0});
  }
  DenseMatrix(Index rows, Index cols, std::vector<T> data)
      : rows_(rows), cols_(cols), data_(std::move(data)) {
    if (rows < 0 || cols < 0 || static_cast<Index>(data_.size()) != rows * cols) {
      throw ShapeError("matrix data length " + std::to_string(data_.size()) +
                       " does not match " + std::to_string(rows) + "x" +
                       std::to_string(cols));
    }
  }
  DenseMatrix(std::initializer_list<std::initializer_list<T>> rows) {
    rows_ = static_cast<Index>(rows.size());
    cols_ = rows_ == 0 ? 0 : static_cast<Index>(rows.begin()->size());
    data_.reserve(static_cast<std::size_t>(rows_ * cols_));
    for (const auto& r : rows) {
      if (static_cast<Index>(r.size()) != cols_) throw ShapeError("ragged initializer");
      data_.insert(data_.end(), r.begin(), r.end());
    }
  }

  Index rows() const { return rows_; }
  Index cols() const { return cols_; }
  Index size() const { return rows_ * cols_; }

  T& operator()(Index r, Index c) { return data_[static_cast<std::size_t>(r * cols_ + c)]; }
  const T& operator()(Index r, Index c) const {
    return data_[static_cast<std::size_t>(r * cols_ + c)];
  }

  std::span<T> row(Index r) { return {data_.data() + r * cols_, static_cast<std::size_t>(cols_)}; }
  std::span<const T> row(Index r) const {
    return {data_.data() + r * cols_, static_cast<std::size_t>(cols_)};
  }

  std::span<T> values() { return data_; }
  std::span<const T> values() const { return data_; }
  std::vector<T> release() && { return std::move(data_); }

  friend bool operator==(const DenseMatrix&, const DenseMatrix&) = default;

 private:
  Index rows_ = 0;
  Index cols_ = 0;
  std::vector<T> data_;
};

using Matrix = DenseMatrix<double>;

// [rows][heads][head_dim] view of a hidden dimension split into attention
// heads. Owns its storage; converting to and from DenseMatrix moves it.
template <typename T>
class HeadedMatrix {
 public:
  HeadedMatrix() = default;
  HeadedMatrix(Index rows, Index heads, Index head_dim)
      : rows_(rows), heads_(heads), head_dim_(head_dim),
        data_(static_cast<std::size_t>(rows * heads * head_dim), T{0}) {
    if (rows < 0 || heads <= 0 || head_dim < 0) throw ShapeError("invalid headed extent");
  }
  HeadedMatrix(DenseMatrix<T>&& dense, Index heads) {
    if (heads <= 0 || dense.cols() % heads != 0) {
      throw ShapeError("hidden dimension " + std::to_string(dense.cols()) +
                       " not divisible by " + std::to_string(heads) + " heads");
    }
    rows_ = dense.rows();
    heads_ = heads;
    head_dim_ = dense.cols() / heads;
    data_ = std::move(dense).release();
  }

  Index rows() const { return rows_; }
  Index heads() const { return heads_; }
  Index head_dim() const { return head_dim_; }
  Index hidden() const { return heads_ * head_dim_; }
  Index size() const { return rows_ * heads_ * head_dim_; }

  std::span<T> at(Index r, Index head) {
    return {data_.data() + (r * heads_ + head) * head_dim_, static_cast<std::size_t>(head_dim_)};
  }
  std::span<const T> at(Index r, Index head) const {
    return {data_.data() + (r * heads_ + head) * head_dim_, static_cast<std::size_t>(head_dim_)};
  }

  std::span<T> values() { return data_; }
  std::span<const T> values() const { return data_; }

  DenseMatrix<T> to_dense() && {
    Index cols = hidden();
    return DenseMatrix<T>(rows_, cols, std::move(data_));
  }
  DenseMatrix<T> to_dense() const& { return DenseMatrix<T>(rows_, hidden(), data_); }

  friend bool operator==(const HeadedMatrix&, const HeadedMatrix&) = default;

 private:
  Index rows_ = 0;
  Index heads_ = 1;
  Index head_dim_ = 0;
  std::vector<T> data_;
};

template <typename T>
DenseMatrix<T> matmul(const DenseMatrix<T>& a, const DenseMatrix<T>& b);
// aᵀ·b without materialising the transpose.
template <typename T>
DenseMatrix<T> matmul_tn(const DenseMatrix<T>& a, const DenseMatrix<T>& b);
// a·bᵀ without materialising the transpose.
template <typename T>
DenseMatrix<T> matmul_nt(const DenseMatrix<T>& a, const DenseMatrix<T>& b);

template <typename T>
void add_inplace(DenseMatrix<T>& acc, const DenseMatrix<T>& x);

template <typename T>
DenseMatrix<T> slice_rows(const DenseMatrix<T>& m, Index begin, Index end);
template <typename T>
DenseMatrix<T> concat_rows(std::span<const DenseMatrix<T>> parts);
template <typename T>
DenseMatrix<T> slice_cols(const DenseMatrix<T>& m, Index begin, Index end);
template <typename T>
DenseMatrix<T> concat_cols(std::span<const DenseMatrix<T>> parts);

template <typename T>
bool all_finite(std::span<const T> values) {
  return std::all_of(values.begin(), values.end(), [](T v) { return std::isfinite(v); });
}

template <typename To, typename From>
DenseMatrix<To> cast_matrix(const DenseMatrix<From>& m) {
  std::vector<To> out(m.values().begin(), m.values().end());
  return DenseMatrix<To>(m.rows(), m.cols(), std::move(out));
}

}  // namespace gtpar
