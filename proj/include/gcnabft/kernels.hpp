#pragma once

#include "gcnabft/fault.hpp"
#include "gcnabft/matrix.hpp"
#include "gcnabft/op_counter.hpp"

namespace gcnabft {

// Multiplication and checksum kernels. Accumulators start from zero and one
// addition is counted per term, so op counts have closed forms:
//   gemm  n x f by f x h: n*f*h multiplies + n*f*h additions
//   spmm  nnz(A) * B.cols of each
// Fault-targetable events are numbered in deterministic kernel order:
// row-major over outputs, then over the reduction dimension.

inline DenseMatrix gemm(const DenseMatrix& a, const DenseMatrix& b,
                        OpCounter& counter, HookSet hooks = {}) {
  if (a.cols() != b.rows())
    throw DimensionMismatch("gemm: A.cols != B.rows");
  DenseMatrix c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < b.cols(); ++j) {
      double acc = 0.0;
      for (std::size_t k = 0; k < a.cols(); ++k) {
        acc += a(i, k) * b(k, j);
        counter.multiplies += 1;
        counter.additions += 1;
        offer_event(hooks, Stream::MacResult, acc);
      }
      c(i, j) = acc;
    }
  }
  return c;
}

inline DenseMatrix spmm(const SparseMatrix& a, const DenseMatrix& b,
                        OpCounter& counter, HookSet hooks = {}) {
  if (a.cols() != b.rows())
    throw DimensionMismatch("spmm: A.cols != B.rows");
  DenseMatrix c(a.rows(), b.cols());
  const auto& off = a.row_offsets();
  const auto& col = a.col_indices();
  const auto& val = a.values();
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < b.cols(); ++j) {
      double acc = 0.0;
      for (std::size_t k = off[i]; k < off[i + 1]; ++k) {
        acc += val[k] * b(col[k], j);
        counter.multiplies += 1;
        counter.additions += 1;
        offer_event(hooks, Stream::MacResult, acc);
      }
      c(i, j) = acc;
    }
  }
  return c;
}

inline DenseMatrix matmul(MatrixView a, const DenseMatrix& b,
                          OpCounter& counter, HookSet hooks = {}) {
  return a.is_sparse() ? spmm(a.sparse(), b, counter, hooks)
                       : gemm(a.dense(), b, counter, hooks);
}

// Per-column sums e^T * M, one addition per term (dense) or per stored
// nonzero (sparse). Accumulation is double; hooks apply when the vector is
// computed online as check state (h_c).
inline DenseMatrix col_checksum(const DenseMatrix& m, OpCounter& counter,
                                HookSet hooks = {}) {
  DenseMatrix out(1, m.cols());
  for (std::size_t j = 0; j < m.cols(); ++j) {
    double acc = 0.0;
    for (std::size_t i = 0; i < m.rows(); ++i) {
      acc += m(i, j);
      counter.additions += 1;
      offer_event(hooks, Stream::ChecksumAccum, acc);
    }
    out(0, j) = acc;
  }
  return out;
}

inline DenseMatrix col_checksum(const SparseMatrix& m, OpCounter& counter,
                                HookSet hooks = {}) {
  DenseMatrix out(1, m.cols());
  const auto& off = m.row_offsets();
  const auto& col = m.col_indices();
  const auto& val = m.values();
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t k = off[i]; k < off[i + 1]; ++k) {
      double acc = out(0, col[k]) + val[k];
      counter.additions += 1;
      offer_event(hooks, Stream::ChecksumAccum, acc);
      out(0, col[k]) = acc;
    }
  }
  return out;
}

inline DenseMatrix col_checksum(MatrixView m, OpCounter& counter,
                                HookSet hooks = {}) {
  return m.is_sparse() ? col_checksum(m.sparse(), counter, hooks)
                       : col_checksum(m.dense(), counter, hooks);
}

// Per-row sums M * e, mirror of col_checksum.
inline DenseMatrix row_checksum(const DenseMatrix& m, OpCounter& counter,
                                HookSet hooks = {}) {
  DenseMatrix out(m.rows(), 1);
  for (std::size_t i = 0; i < m.rows(); ++i) {
    double acc = 0.0;
    for (std::size_t j = 0; j < m.cols(); ++j) {
      acc += m(i, j);
      counter.additions += 1;
      offer_event(hooks, Stream::ChecksumAccum, acc);
    }
    out(i, 0) = acc;
  }
  return out;
}

inline DenseMatrix row_checksum(const SparseMatrix& m, OpCounter& counter,
                                HookSet hooks = {}) {
  DenseMatrix out(m.rows(), 1);
  const auto& off = m.row_offsets();
  const auto& val = m.values();
  for (std::size_t i = 0; i < m.rows(); ++i) {
    double acc = 0.0;
    for (std::size_t k = off[i]; k < off[i + 1]; ++k) {
      acc += val[k];
      counter.additions += 1;
      offer_event(hooks, Stream::ChecksumAccum, acc);
    }
    out(i, 0) = acc;
  }
  return out;
}

// Sum of all entries, accumulated in double from zero, row-major; one
// addition per entry. This is the online "actual checksum" e^T M e.
inline double total_checksum(const DenseMatrix& m, OpCounter& counter,
                             HookSet hooks = {}) {
  double acc = 0.0;
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t j = 0; j < m.cols(); ++j) {
      acc += m(i, j);
      counter.additions += 1;
      offer_event(hooks, Stream::ChecksumAccum, acc);
    }
  }
  return acc;
}

// Dot product of two checksum vectors (shapes 1xN / Nx1 in any mix),
// accumulated in double since it feeds the verdict comparison. One
// ChecksumAccum event per multiply-add on the running sum.
inline double checksum_dot(const DenseMatrix& x, const DenseMatrix& y,
                           OpCounter& counter, HookSet hooks = {}) {
  if (x.size() != y.size() || (x.rows() != 1 && x.cols() != 1) ||
      (y.rows() != 1 && y.cols() != 1))
    throw DimensionMismatch("checksum_dot: vector shapes do not match");
  double acc = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    acc += x.data()[k] * y.data()[k];
    counter.multiplies += 1;
    counter.additions += 1;
    offer_event(hooks, Stream::ChecksumAccum, acc);
  }
  return acc;
}

// Elementwise ReLU; activation ops are excluded from all op accounting.
inline DenseMatrix relu(DenseMatrix m) {
  for (double& v : m.data()) v = v > 0.0 ? v : 0.0;
  return m;
}

}  // namespace gcnabft
