#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "fairres/dense.hpp"

namespace fairres {

struct Triplet {
  std::size_t row;
  std::size_t col;
  double value;
};

// Compressed sparse row matrix.
//
// Invariants: row_offsets has num_rows + 1 non-decreasing entries ending at
// nnz; column indices strictly increase within a row; no stored zeros.
class SparseMatrix {
 public:
  SparseMatrix() : row_offsets_(1, 0) {}

  // Validates the CSR invariants; throws StructuralError when violated.
  SparseMatrix(std::size_t num_rows, std::size_t num_cols,
               std::vector<std::size_t> row_offsets,
               std::vector<std::size_t> col_indices, std::vector<double> values);

  // Duplicate coordinates are summed; entries that end up zero are dropped.
  static SparseMatrix from_triplets(std::size_t num_rows, std::size_t num_cols,
                                    std::vector<Triplet> triplets);
  static SparseMatrix from_dense(const DenseMatrix& m);
  static SparseMatrix identity(std::size_t n);

  std::size_t num_rows() const { return num_rows_; }
  std::size_t num_cols() const { return num_cols_; }
  std::size_t nnz() const { return values_.size(); }

  std::span<const std::size_t> row_offsets() const { return row_offsets_; }
  std::span<const std::size_t> col_indices() const { return col_indices_; }
  std::span<const double> values() const { return values_; }

  std::span<const std::size_t> row_cols(std::size_t r) const;
  std::span<const double> row_values(std::size_t r) const;

  // Stored value or 0.
  double at(std::size_t r, std::size_t c) const;

  DenseMatrix to_dense() const;

  friend bool operator==(const SparseMatrix&, const SparseMatrix&) = default;

 private:
  std::size_t num_rows_ = 0;
  std::size_t num_cols_ = 0;
  std::vector<std::size_t> row_offsets_;
  std::vector<std::size_t> col_indices_;
  std::vector<double> values_;
};

// Exact sparse-dense product. Each output entry accumulates in ascending
// column order so results are reproducible bit for bit.
DenseMatrix spmm(const SparseMatrix& m, const DenseMatrix& x);

// Returns x - coeff * (m * x) without materializing I - coeff * m.
DenseMatrix apply_identity_minus(const SparseMatrix& m, double coeff,
                                 const DenseMatrix& x);

}  // namespace fairres
