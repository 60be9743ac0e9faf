#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace hybridns {

using Vector = std::vector<double>;

/// Compressed sparse row matrix. Column indices are sorted and unique within
/// each row; explicit zeros are allowed.
class SparseMatrix {
 public:
  SparseMatrix() = default;
  SparseMatrix(std::size_t rows, std::size_t cols, std::vector<std::size_t> row_offsets,
               std::vector<std::size_t> col_indices, std::vector<double> values);

  /// Builds from unordered (row, col, value) triplets; duplicates are summed in
  /// insertion order so the result is deterministic.
  struct Triplet {
    std::size_t row;
    std::size_t col;
    double value;
  };
  static SparseMatrix from_triplets(std::size_t rows, std::size_t cols,
                                    std::vector<Triplet> triplets);
  static SparseMatrix identity(std::size_t n);
  static SparseMatrix from_dense(const std::vector<std::vector<double>>& dense);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t nnz() const { return values_.size(); }

  std::span<const std::size_t> row_offsets() const { return row_offsets_; }
  std::span<const std::size_t> col_indices() const { return col_indices_; }
  std::span<const double> values() const { return values_; }
  std::span<double> values() { return values_; }

  /// Entry (i, j), zero when not stored.
  double at(std::size_t i, std::size_t j) const;
  /// Position of (i, j) in values(), or npos.
  std::size_t find(std::size_t i, std::size_t j) const;
  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

  void multiply(std::span<const double> x, std::span<double> y) const;
  Vector operator*(std::span<const double> x) const;
  /// y = A^T x
  Vector multiply_transpose(std::span<const double> x) const;

  SparseMatrix transpose() const;
  SparseMatrix scaled(double factor) const;
  Vector diagonal() const;

  /// Replaces each listed row by the corresponding identity row.
  void replace_rows_with_identity(std::span<const std::size_t> rows);

  /// Largest |A_ij - A_ji| over the stored pattern of both matrices.
  double symmetry_defect() const;

  std::vector<std::vector<double>> to_dense() const;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<std::size_t> row_offsets_{0};
  std::vector<std::size_t> col_indices_;
  std::vector<double> values_;
};

/// a*A + b*B over the union of both patterns.
SparseMatrix linear_combination(double a, const SparseMatrix& A, double b, const SparseMatrix& B);

/// Sum of c_i * A_i over the union of all patterns; terms with c_i == 0 still
/// contribute their pattern.
struct ScaledMatrix {
  double coefficient;
  const SparseMatrix* matrix;
};
SparseMatrix linear_combination(std::span<const ScaledMatrix> terms);

/// Block matrix [[A, B], [C, D]]; any block pointer may be null (zero block).
SparseMatrix block_matrix(std::size_t n_top, std::size_t n_bottom, std::size_t n_left,
                          std::size_t n_right, const SparseMatrix* A, const SparseMatrix* B,
                          const SparseMatrix* C, const SparseMatrix* D);

// Dense vector helpers.
double dot(std::span<const double> a, std::span<const double> b);
double norm2(std::span<const double> a);
/// y += a * x
void axpy(double a, std::span<const double> x, std::span<double> y);
/// x^T A y
double quadratic_form(const SparseMatrix& A, std::span<const double> x, std::span<const double> y);

}  // namespace hybridns
