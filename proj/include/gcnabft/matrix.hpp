#pragma once

#include <algorithm>
#include <cstddef>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "gcnabft/errors.hpp"

namespace gcnabft {

// Row-major dense matrix. Checksum vectors are 1xN or Nx1 DenseMatrix.
// Working precision is double; the single-precision hardware datapath is
// modeled in the fault hooks (see fault.hpp), not in storage.
class DenseMatrix {
 public:
  DenseMatrix(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {
    if (rows == 0 || cols == 0)
      throw DimensionMismatch("DenseMatrix dimensions must be >= 1");
  }

  DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> data)
      : rows_(rows), cols_(cols), data_(std::move(data)) {
    if (rows == 0 || cols == 0)
      throw DimensionMismatch("DenseMatrix dimensions must be >= 1");
    if (data_.size() != rows * cols)
      throw DimensionMismatch("DenseMatrix data length != rows*cols");
  }

  static DenseMatrix identity(std::size_t n) {
    DenseMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }

  double operator()(std::size_t i, std::size_t j) const {
    return data_[i * cols_ + j];
  }
  double& operator()(std::size_t i, std::size_t j) {
    return data_[i * cols_ + j];
  }

  const std::vector<double>& data() const { return data_; }
  std::vector<double>& data() { return data_; }

  bool operator==(const DenseMatrix& other) const = default;

 private:
  std::size_t rows_;
  std::size_t cols_;
  std::vector<double> data_;
};

// CSR sparse matrix. Explicit zeros are rejected so nnz-based operation
// counts stay exact.
class SparseMatrix {
 public:
  SparseMatrix(std::size_t rows, std::size_t cols,
               std::vector<std::size_t> row_offsets,
               std::vector<std::size_t> col_indices,
               std::vector<double> values)
      : rows_(rows),
        cols_(cols),
        row_offsets_(std::move(row_offsets)),
        col_indices_(std::move(col_indices)),
        values_(std::move(values)) {
    validate();
  }

  // Builds from (row, col, value) triplets; triplets may be unsorted but
  // duplicates are rejected.
  static SparseMatrix from_triplets(
      std::size_t rows, std::size_t cols,
      std::vector<std::tuple<std::size_t, std::size_t, double>> triplets);

  static SparseMatrix from_dense(const DenseMatrix& m);

  static SparseMatrix identity(std::size_t n);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t nnz() const { return values_.size(); }

  const std::vector<std::size_t>& row_offsets() const { return row_offsets_; }
  const std::vector<std::size_t>& col_indices() const { return col_indices_; }
  const std::vector<double>& values() const { return values_; }

  DenseMatrix to_dense() const {
    DenseMatrix out(rows_, cols_);
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t k = row_offsets_[i]; k < row_offsets_[i + 1]; ++k)
        out(i, col_indices_[k]) = values_[k];
    return out;
  }

  bool operator==(const SparseMatrix& other) const = default;

 private:
  void validate() const {
    if (rows_ == 0 || cols_ == 0)
      throw DimensionMismatch("SparseMatrix dimensions must be >= 1");
    if (row_offsets_.size() != rows_ + 1)
      throw ShapeInconsistent("row_offsets length != rows+1");
    if (row_offsets_.front() != 0)
      throw ShapeInconsistent("row_offsets[0] != 0");
    if (row_offsets_.back() != values_.size() ||
        col_indices_.size() != values_.size())
      throw ShapeInconsistent("row_offsets[rows] != number of stored values");
    for (std::size_t i = 0; i < rows_; ++i) {
      if (row_offsets_[i] > row_offsets_[i + 1])
        throw ShapeInconsistent("row_offsets not monotone");
      for (std::size_t k = row_offsets_[i]; k < row_offsets_[i + 1]; ++k) {
        if (col_indices_[k] >= cols_)
          throw IndexOutOfRange("column index out of range");
        if (k > row_offsets_[i] && col_indices_[k] <= col_indices_[k - 1])
          throw ShapeInconsistent("column indices not strictly increasing");
        if (values_[k] == 0.0)
          throw ExplicitZero("explicit zero stored in sparse matrix");
      }
    }
  }

  std::size_t rows_;
  std::size_t cols_;
  std::vector<std::size_t> row_offsets_;
  std::vector<std::size_t> col_indices_;
  std::vector<double> values_;
};

inline SparseMatrix SparseMatrix::from_triplets(
    std::size_t rows, std::size_t cols,
    std::vector<std::tuple<std::size_t, std::size_t, double>> triplets) {
  std::sort(triplets.begin(), triplets.end(),
            [](const auto& a, const auto& b) {
              return std::get<0>(a) != std::get<0>(b)
                         ? std::get<0>(a) < std::get<0>(b)
                         : std::get<1>(a) < std::get<1>(b);
            });
  std::vector<std::size_t> offsets(rows + 1, 0);
  std::vector<std::size_t> cols_idx;
  std::vector<double> vals;
  cols_idx.reserve(triplets.size());
  vals.reserve(triplets.size());
  for (std::size_t t = 0; t < triplets.size(); ++t) {
    auto [i, j, v] = triplets[t];
    if (i >= rows || j >= cols)
      throw IndexOutOfRange("triplet index out of range");
    if (t > 0 && std::get<0>(triplets[t - 1]) == i &&
        std::get<1>(triplets[t - 1]) == j)
      throw ShapeInconsistent("duplicate triplet");
    ++offsets[i + 1];
    cols_idx.push_back(j);
    vals.push_back(v);
  }
  for (std::size_t i = 0; i < rows; ++i) offsets[i + 1] += offsets[i];
  return SparseMatrix(rows, cols, std::move(offsets), std::move(cols_idx),
                      std::move(vals));
}

inline SparseMatrix SparseMatrix::from_dense(const DenseMatrix& m) {
  std::vector<std::tuple<std::size_t, std::size_t, double>> trip;
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j)
      if (m(i, j) != 0.0) trip.emplace_back(i, j, m(i, j));
  return from_triplets(m.rows(), m.cols(), std::move(trip));
}

inline SparseMatrix SparseMatrix::identity(std::size_t n) {
  std::vector<std::tuple<std::size_t, std::size_t, double>> trip;
  for (std::size_t i = 0; i < n; ++i) trip.emplace_back(i, i, 1.0);
  return from_triplets(n, n, std::move(trip));
}

// Non-owning dense-or-sparse reference; the caller picks the representation,
// nothing densifies implicitly.
class MatrixView {
 public:
  MatrixView(const DenseMatrix& m) : dense_(&m), sparse_(nullptr) {}
  MatrixView(const SparseMatrix& m) : dense_(nullptr), sparse_(&m) {}

  bool is_sparse() const { return sparse_ != nullptr; }
  const DenseMatrix& dense() const { return *dense_; }
  const SparseMatrix& sparse() const { return *sparse_; }

  std::size_t rows() const {
    return is_sparse() ? sparse_->rows() : dense_->rows();
  }
  std::size_t cols() const {
    return is_sparse() ? sparse_->cols() : dense_->cols();
  }
  // nnz for sparse, rows*cols for dense: the unit that check-op formulas use.
  std::size_t nnz_or_dense() const {
    return is_sparse() ? sparse_->nnz() : dense_->size();
  }

 private:
  const DenseMatrix* dense_;
  const SparseMatrix* sparse_;
};

}  // namespace gcnabft
