#include "hybridns/sparse_matrix.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace hybridns {

SparseMatrix::SparseMatrix(std::size_t rows, std::size_t cols,
                           std::vector<std::size_t> row_offsets,
                           std::vector<std::size_t> col_indices, std::vector<double> values)
    : rows_(rows),
      cols_(cols),
      row_offsets_(std::move(row_offsets)),
      col_indices_(std::move(col_indices)),
      values_(std::move(values)) {
  if (row_offsets_.size() != rows_ + 1 || row_offsets_.front() != 0 ||
      row_offsets_.back() != col_indices_.size() || col_indices_.size() != values_.size()) {
    throw std::invalid_argument("SparseMatrix: inconsistent CSR arrays");
  }
  for (std::size_t i = 0; i < rows_; ++i) {
    if (row_offsets_[i] > row_offsets_[i + 1]) {
      throw std::invalid_argument("SparseMatrix: row offsets not monotone");
    }
    for (std::size_t k = row_offsets_[i]; k < row_offsets_[i + 1]; ++k) {
      if (col_indices_[k] >= cols_) throw std::invalid_argument("SparseMatrix: column out of range");
      if (k > row_offsets_[i] && col_indices_[k] <= col_indices_[k - 1]) {
        throw std::invalid_argument("SparseMatrix: columns not sorted/unique");
      }
    }
  }
}

SparseMatrix SparseMatrix::from_triplets(std::size_t rows, std::size_t cols,
                                         std::vector<Triplet> triplets) {
  std::stable_sort(triplets.begin(), triplets.end(), [](const Triplet& a, const Triplet& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });
  std::vector<std::size_t> offsets(rows + 1, 0);
  std::vector<std::size_t> cols_out;
  std::vector<double> vals;
  cols_out.reserve(triplets.size());
  vals.reserve(triplets.size());
  std::size_t prev_row = static_cast<std::size_t>(-1);
  std::size_t prev_col = static_cast<std::size_t>(-1);
  for (const auto& t : triplets) {
    if (t.row >= rows || t.col >= cols) throw std::invalid_argument("triplet out of range");
    if (t.row == prev_row && t.col == prev_col) {
      vals.back() += t.value;
      continue;
    }
    cols_out.push_back(t.col);
    vals.push_back(t.value);
    ++offsets[t.row + 1];
    prev_row = t.row;
    prev_col = t.col;
  }
  std::partial_sum(offsets.begin(), offsets.end(), offsets.begin());
  return SparseMatrix(rows, cols, std::move(offsets), std::move(cols_out), std::move(vals));
}

SparseMatrix SparseMatrix::identity(std::size_t n) {
  std::vector<std::size_t> offsets(n + 1);
  std::iota(offsets.begin(), offsets.end(), std::size_t{0});
  std::vector<std::size_t> cols(n);
  std::iota(cols.begin(), cols.end(), std::size_t{0});
  return SparseMatrix(n, n, std::move(offsets), std::move(cols), Vector(n, 1.0));
}

SparseMatrix SparseMatrix::from_dense(const std::vector<std::vector<double>>& dense) {
  const std::size_t n = dense.size();
  const std::size_t m = n == 0 ? 0 : dense.front().size();
  std::vector<Triplet> trips;
  for (std::size_t i = 0; i < n; ++i) {
    if (dense[i].size() != m) throw std::invalid_argument("from_dense: ragged rows");
    for (std::size_t j = 0; j < m; ++j) {
      if (dense[i][j] != 0.0) trips.push_back({i, j, dense[i][j]});
    }
  }
  return from_triplets(n, m, std::move(trips));
}

std::size_t SparseMatrix::find(std::size_t i, std::size_t j) const {
  const auto begin = col_indices_.begin() + static_cast<std::ptrdiff_t>(row_offsets_[i]);
  const auto end = col_indices_.begin() + static_cast<std::ptrdiff_t>(row_offsets_[i + 1]);
  const auto it = std::lower_bound(begin, end, j);
  if (it == end || *it != j) return npos;
  return static_cast<std::size_t>(it - col_indices_.begin());
}

double SparseMatrix::at(std::size_t i, std::size_t j) const {
  const auto k = find(i, j);
  return k == npos ? 0.0 : values_[k];
}

void SparseMatrix::multiply(std::span<const double> x, std::span<double> y) const {
  assert(x.size() == cols_ && y.size() == rows_);
  for (std::size_t i = 0; i < rows_; ++i) {
    double sum = 0.0;
    for (std::size_t k = row_offsets_[i]; k < row_offsets_[i + 1]; ++k) {
      sum += values_[k] * x[col_indices_[k]];
    }
    y[i] = sum;
  }
}

Vector SparseMatrix::operator*(std::span<const double> x) const {
  if (x.size() != cols_) throw std::invalid_argument("SparseMatrix::operator*: size mismatch");
  Vector y(rows_);
  multiply(x, y);
  return y;
}

Vector SparseMatrix::multiply_transpose(std::span<const double> x) const {
  if (x.size() != rows_) throw std::invalid_argument("multiply_transpose: size mismatch");
  Vector y(cols_, 0.0);
  for (std::size_t i = 0; i < rows_; ++i) {
    for (std::size_t k = row_offsets_[i]; k < row_offsets_[i + 1]; ++k) {
      y[col_indices_[k]] += values_[k] * x[i];
    }
  }
  return y;
}

SparseMatrix SparseMatrix::transpose() const {
  std::vector<std::size_t> offsets(cols_ + 1, 0);
  for (auto c : col_indices_) ++offsets[c + 1];
  std::partial_sum(offsets.begin(), offsets.end(), offsets.begin());
  std::vector<std::size_t> cols(nnz());
  Vector vals(nnz());
  std::vector<std::size_t> cursor(offsets.begin(), offsets.end() - 1);
  for (std::size_t i = 0; i < rows_; ++i) {
    for (std::size_t k = row_offsets_[i]; k < row_offsets_[i + 1]; ++k) {
      const auto dst = cursor[col_indices_[k]]++;
      cols[dst] = i;
      vals[dst] = values_[k];
    }
  }
  return SparseMatrix(cols_, rows_, std::move(offsets), std::move(cols), std::move(vals));
}

SparseMatrix SparseMatrix::scaled(double factor) const {
  SparseMatrix out = *this;
  for (auto& v : out.values_) v *= factor;
  return out;
}

Vector SparseMatrix::diagonal() const {
  Vector d(std::min(rows_, cols_), 0.0);
  for (std::size_t i = 0; i < d.size(); ++i) d[i] = at(i, i);
  return d;
}

void SparseMatrix::replace_rows_with_identity(std::span<const std::size_t> rows) {
  std::vector<char> mark(rows_, 0);
  for (auto r : rows) {
    if (r >= rows_ || r >= cols_) throw std::out_of_range("replace_rows_with_identity");
    mark[r] = 1;
  }
  std::vector<std::size_t> offsets(rows_ + 1, 0);
  std::vector<std::size_t> cols;
  Vector vals;
  cols.reserve(nnz());
  vals.reserve(nnz());
  for (std::size_t i = 0; i < rows_; ++i) {
    if (mark[i]) {
      cols.push_back(i);
      vals.push_back(1.0);
    } else {
      for (std::size_t k = row_offsets_[i]; k < row_offsets_[i + 1]; ++k) {
        cols.push_back(col_indices_[k]);
        vals.push_back(values_[k]);
      }
    }
    offsets[i + 1] = cols.size();
  }
  row_offsets_ = std::move(offsets);
  col_indices_ = std::move(cols);
  values_ = std::move(vals);
}

double SparseMatrix::symmetry_defect() const {
  if (rows_ != cols_) throw std::invalid_argument("symmetry_defect: matrix not square");
  double worst = 0.0;
  for (std::size_t i = 0; i < rows_; ++i) {
    for (std::size_t k = row_offsets_[i]; k < row_offsets_[i + 1]; ++k) {
      worst = std::max(worst, std::abs(values_[k] - at(col_indices_[k], i)));
    }
  }
  return worst;
}

std::vector<std::vector<double>> SparseMatrix::to_dense() const {
  std::vector<std::vector<double>> d(rows_, std::vector<double>(cols_, 0.0));
  for (std::size_t i = 0; i < rows_; ++i) {
    for (std::size_t k = row_offsets_[i]; k < row_offsets_[i + 1]; ++k) {
      d[i][col_indices_[k]] = values_[k];
    }
  }
  return d;
}

SparseMatrix linear_combination(std::span<const ScaledMatrix> terms) {
  if (terms.empty()) throw std::invalid_argument("linear_combination: no terms");
  const std::size_t rows = terms.front().matrix->rows();
  const std::size_t cols = terms.front().matrix->cols();
  for (const auto& t : terms) {
    if (t.matrix->rows() != rows || t.matrix->cols() != cols) {
      throw std::invalid_argument("linear_combination: shape mismatch");
    }
  }
  // Shared pattern (the usual case for operators from one scatter): combine
  // values directly, in the same accumulation order as the general path.
  const SparseMatrix& first = *terms.front().matrix;
  const bool same_pattern = std::all_of(terms.begin(), terms.end(), [&](const ScaledMatrix& t) {
    return std::ranges::equal(t.matrix->row_offsets(), first.row_offsets()) &&
           std::ranges::equal(t.matrix->col_indices(), first.col_indices());
  });
  if (same_pattern) {
    Vector vals(first.nnz(), 0.0);
    for (const auto& t : terms) {
      const auto va = t.matrix->values();
      for (std::size_t k = 0; k < vals.size(); ++k) vals[k] += t.coefficient * va[k];
    }
    const auto ro = first.row_offsets();
    const auto ci = first.col_indices();
    return SparseMatrix(rows, cols, {ro.begin(), ro.end()}, {ci.begin(), ci.end()},
                        std::move(vals));
  }

  std::vector<std::size_t> offsets(rows + 1, 0);
  std::vector<std::size_t> out_cols;
  Vector out_vals;
  std::vector<std::size_t> merged;
  for (std::size_t i = 0; i < rows; ++i) {
    merged.clear();
    for (const auto& t : terms) {
      const auto ro = t.matrix->row_offsets();
      const auto ci = t.matrix->col_indices();
      merged.insert(merged.end(), ci.begin() + static_cast<std::ptrdiff_t>(ro[i]),
                    ci.begin() + static_cast<std::ptrdiff_t>(ro[i + 1]));
    }
    std::sort(merged.begin(), merged.end());
    merged.erase(std::unique(merged.begin(), merged.end()), merged.end());
    const std::size_t base = out_cols.size();
    out_cols.insert(out_cols.end(), merged.begin(), merged.end());
    out_vals.resize(out_cols.size(), 0.0);
    // Terms are accumulated in argument order for every entry.
    for (const auto& t : terms) {
      const auto ro = t.matrix->row_offsets();
      const auto ci = t.matrix->col_indices();
      const auto va = t.matrix->values();
      std::size_t pos = base;
      for (std::size_t k = ro[i]; k < ro[i + 1]; ++k) {
        while (out_cols[pos] != ci[k]) ++pos;
        out_vals[pos] += t.coefficient * va[k];
      }
    }
    offsets[i + 1] = out_cols.size();
  }
  return SparseMatrix(rows, cols, std::move(offsets), std::move(out_cols), std::move(out_vals));
}

SparseMatrix linear_combination(double a, const SparseMatrix& A, double b, const SparseMatrix& B) {
  const ScaledMatrix terms[] = {{a, &A}, {b, &B}};
  return linear_combination(terms);
}

SparseMatrix block_matrix(std::size_t n_top, std::size_t n_bottom, std::size_t n_left,
                          std::size_t n_right, const SparseMatrix* A, const SparseMatrix* B,
                          const SparseMatrix* C, const SparseMatrix* D) {
  auto check = [](const SparseMatrix* m, std::size_t r, std::size_t c) {
    if (m && (m->rows() != r || m->cols() != c)) {
      throw std::invalid_argument("block_matrix: block shape mismatch");
    }
  };
  check(A, n_top, n_left);
  check(B, n_top, n_right);
  check(C, n_bottom, n_left);
  check(D, n_bottom, n_right);
  const std::size_t rows = n_top + n_bottom;
  std::vector<std::size_t> offsets(rows + 1, 0);
  std::vector<std::size_t> cols;
  Vector vals;
  auto append_row = [&](const SparseMatrix* m, std::size_t i, std::size_t col_shift) {
    if (!m) return;
    const auto ro = m->row_offsets();
    const auto ci = m->col_indices();
    const auto va = m->values();
    for (std::size_t k = ro[i]; k < ro[i + 1]; ++k) {
      cols.push_back(ci[k] + col_shift);
      vals.push_back(va[k]);
    }
  };
  for (std::size_t i = 0; i < rows; ++i) {
    if (i < n_top) {
      append_row(A, i, 0);
      append_row(B, i, n_left);
    } else {
      append_row(C, i - n_top, 0);
      append_row(D, i - n_top, n_left);
    }
    offsets[i + 1] = cols.size();
  }
  return SparseMatrix(rows, n_left + n_right, std::move(offsets), std::move(cols),
                      std::move(vals));
}

double dot(std::span<const double> a, std::span<const double> b) {
  assert(a.size() == b.size());
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

void axpy(double a, std::span<const double> x, std::span<double> y) {
  assert(x.size() == y.size());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += a * x[i];
}

double quadratic_form(const SparseMatrix& A, std::span<const double> x,
                      std::span<const double> y) {
  if (x.size() != A.rows() || y.size() != A.cols()) {
    throw std::invalid_argument("quadratic_form: size mismatch");
  }
  const auto ro = A.row_offsets();
  const auto ci = A.col_indices();
  const auto va = A.values();
  double s = 0.0;
  for (std::size_t i = 0; i < A.rows(); ++i) {
    double row = 0.0;
    for (std::size_t k = ro[i]; k < ro[i + 1]; ++k) row += va[k] * y[ci[k]];
    s += x[i] * row;
  }
  return s;
}

}  // namespace hybridns
