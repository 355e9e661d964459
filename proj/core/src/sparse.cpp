#include "fairres/sparse.hpp"

#include <algorithm>

#include "fairres/errors.hpp"

namespace fairres {

SparseMatrix::SparseMatrix(std::size_t num_rows, std::size_t num_cols,
                           std::vector<std::size_t> row_offsets,
                           std::vector<std::size_t> col_indices,
                           std::vector<double> values)
    : num_rows_(num_rows),
      num_cols_(num_cols),
      row_offsets_(std::move(row_offsets)),
      col_indices_(std::move(col_indices)),
      values_(std::move(values)) {
  if (row_offsets_.size() != num_rows_ + 1) {
    throw StructuralError("row_offsets must have num_rows + 1 entries");
  }
  if (col_indices_.size() != values_.size()) {
    throw StructuralError("col_indices and values differ in length");
  }
  if (row_offsets_.front() != 0 || row_offsets_.back() != values_.size()) {
    throw StructuralError("row_offsets must start at 0 and end at nnz");
  }
  for (std::size_t r = 0; r < num_rows_; ++r) {
    if (row_offsets_[r] > row_offsets_[r + 1]) {
      throw StructuralError("row_offsets must be non-decreasing");
    }
    for (std::size_t p = row_offsets_[r]; p < row_offsets_[r + 1]; ++p) {
      if (col_indices_[p] >= num_cols_) throw StructuralError("column index out of range");
      if (p > row_offsets_[r] && col_indices_[p] <= col_indices_[p - 1]) {
        throw StructuralError("column indices must strictly increase within a row");
      }
      if (values_[p] == 0.0) throw StructuralError("explicit zero stored");
    }
  }
}

SparseMatrix SparseMatrix::from_triplets(std::size_t num_rows, std::size_t num_cols,
                                         std::vector<Triplet> triplets) {
  for (const auto& t : triplets) {
    if (t.row >= num_rows || t.col >= num_cols) {
      throw StructuralError("triplet coordinate out of range");
    }
  }
  std::stable_sort(triplets.begin(), triplets.end(), [](const Triplet& a, const Triplet& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });
  std::vector<std::size_t> offsets(num_rows + 1, 0);
  std::vector<std::size_t> cols;
  std::vector<double> vals;
  cols.reserve(triplets.size());
  vals.reserve(triplets.size());
  for (std::size_t i = 0; i < triplets.size();) {
    const std::size_t r = triplets[i].row;
    const std::size_t c = triplets[i].col;
    double sum = 0.0;
    for (; i < triplets.size() && triplets[i].row == r && triplets[i].col == c; ++i) {
      sum += triplets[i].value;
    }
    if (sum == 0.0) continue;
    cols.push_back(c);
    vals.push_back(sum);
    ++offsets[r + 1];
  }
  for (std::size_t r = 0; r < num_rows; ++r) offsets[r + 1] += offsets[r];
  return SparseMatrix(num_rows, num_cols, std::move(offsets), std::move(cols),
                      std::move(vals));
}

SparseMatrix SparseMatrix::from_dense(const DenseMatrix& m) {
  std::vector<std::size_t> offsets(m.rows() + 1, 0);
  std::vector<std::size_t> cols;
  std::vector<double> vals;
  for (std::size_t r = 0; r < m.rows(); ++r) {
    for (std::size_t c = 0; c < m.cols(); ++c) {
      if (m(r, c) != 0.0) {
        cols.push_back(c);
        vals.push_back(m(r, c));
      }
    }
    offsets[r + 1] = cols.size();
  }
  return SparseMatrix(m.rows(), m.cols(), std::move(offsets), std::move(cols),
                      std::move(vals));
}

SparseMatrix SparseMatrix::identity(std::size_t n) {
  std::vector<std::size_t> offsets(n + 1);
  std::vector<std::size_t> cols(n);
  for (std::size_t i = 0; i <= n; ++i) offsets[i] = i;
  for (std::size_t i = 0; i < n; ++i) cols[i] = i;
  return SparseMatrix(n, n, std::move(offsets), std::move(cols),
                      std::vector<double>(n, 1.0));
}

std::span<const std::size_t> SparseMatrix::row_cols(std::size_t r) const {
  return std::span<const std::size_t>(col_indices_)
      .subspan(row_offsets_[r], row_offsets_[r + 1] - row_offsets_[r]);
}

std::span<const double> SparseMatrix::row_values(std::size_t r) const {
  return std::span<const double>(values_).subspan(row_offsets_[r],
                                                  row_offsets_[r + 1] - row_offsets_[r]);
}

double SparseMatrix::at(std::size_t r, std::size_t c) const {
  auto cols = row_cols(r);
  auto it = std::lower_bound(cols.begin(), cols.end(), c);
  if (it == cols.end() || *it != c) return 0.0;
  return row_values(r)[static_cast<std::size_t>(it - cols.begin())];
}

DenseMatrix SparseMatrix::to_dense() const {
  DenseMatrix d(num_rows_, num_cols_);
  for (std::size_t r = 0; r < num_rows_; ++r) {
    auto cols = row_cols(r);
    auto vals = row_values(r);
    for (std::size_t p = 0; p < cols.size(); ++p) d(r, cols[p]) = vals[p];
  }
  return d;
}

DenseMatrix spmm(const SparseMatrix& m, const DenseMatrix& x) {
  if (m.num_cols() != x.rows()) {
    throw StructuralError("spmm: matrix has " + std::to_string(m.num_cols()) +
                          " columns but signal has " + std::to_string(x.rows()) + " rows");
  }
  DenseMatrix out(m.num_rows(), x.cols());
  for (std::size_t r = 0; r < m.num_rows(); ++r) {
    auto cols = m.row_cols(r);
    auto vals = m.row_values(r);
    auto orow = out.row(r);
    for (std::size_t p = 0; p < cols.size(); ++p) {
      auto xrow = x.row(cols[p]);
      const double v = vals[p];
      for (std::size_t j = 0; j < orow.size(); ++j) orow[j] += v * xrow[j];
    }
  }
  return out;
}

DenseMatrix apply_identity_minus(const SparseMatrix& m, double coeff, const DenseMatrix& x) {
  DenseMatrix mx = spmm(m, x);
  auto md = mx.data();
  auto xd = x.data();
  for (std::size_t i = 0; i < md.size(); ++i) md[i] = xd[i] - coeff * md[i];
  return mx;
}

}  // namespace fairres
