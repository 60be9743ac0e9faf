#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "hybridns/sparse_matrix.hpp"

namespace hybridns {

/// Reverse Cuthill-McKee ordering of the symmetrized pattern of A. Entry i of
/// the result is the original index placed at position i.
std::vector<std::size_t> reverse_cuthill_mckee(const SparseMatrix& A);

/// LU factorization without pivoting, stored as a band after RCM reordering.
/// Meant for matrices whose symmetric part is positive definite away from
/// identity rows; used where incomplete factorizations break down.
class BandedLu {
 public:
  /// Throws std::domain_error on a zero pivot and std::length_error when the
  /// band would exceed max_entries stored values.
  explicit BandedLu(const SparseMatrix& A, std::size_t max_entries = 40'000'000);

  void apply(std::span<const double> r, std::span<double> z) const;
  Vector solve(std::span<const double> b) const;
  std::size_t bandwidth() const { return bw_; }
  std::size_t size() const { return n_; }

 private:
  double* row(std::size_t i) { return band_.data() + i * (2 * bw_ + 1) + bw_ - i; }
  const double* row(std::size_t i) const { return band_.data() + i * (2 * bw_ + 1) + bw_ - i; }

  std::size_t n_ = 0;
  std::size_t bw_ = 0;
  std::vector<std::size_t> order_;
  std::vector<std::size_t> position_;
  std::vector<double> band_;
  // Envelope: row i of L starts at first_[i]; row k of U ends at reach_[k].
  std::vector<std::size_t> first_;
  std::vector<std::size_t> reach_;
};

}  // namespace hybridns
