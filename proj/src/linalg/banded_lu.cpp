#include "hybridns/banded_lu.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace hybridns {

std::vector<std::size_t> reverse_cuthill_mckee(const SparseMatrix& A) {
  if (A.rows() != A.cols()) throw std::invalid_argument("reverse_cuthill_mckee: not square");
  const std::size_t n = A.rows();
  const SparseMatrix S = linear_combination(1.0, A, 1.0, A.transpose());
  const auto ro = S.row_offsets();
  const auto ci = S.col_indices();
  auto degree = [&](std::size_t i) { return ro[i + 1] - ro[i]; };

  std::vector<std::size_t> by_degree(n);
  for (std::size_t i = 0; i < n; ++i) by_degree[i] = i;
  std::stable_sort(by_degree.begin(), by_degree.end(),
                   [&](std::size_t a, std::size_t b) { return degree(a) < degree(b); });

  std::vector<char> placed(n, 0);
  std::vector<std::size_t> order;
  order.reserve(n);
  std::vector<std::size_t> mark(n, 0);
  std::size_t stamp = 0;
  std::vector<std::size_t> queue;

  // Last node reached by a BFS from root over unplaced nodes.
  auto farthest = [&](std::size_t root) {
    ++stamp;
    queue.assign(1, root);
    mark[root] = stamp;
    for (std::size_t h = 0; h < queue.size(); ++h) {
      const std::size_t u = queue[h];
      for (std::size_t q = ro[u]; q < ro[u + 1]; ++q) {
        const std::size_t v = ci[q];
        if (!placed[v] && mark[v] != stamp) {
          mark[v] = stamp;
          queue.push_back(v);
        }
      }
    }
    return queue.back();
  };

  std::vector<std::size_t> next;
  for (std::size_t seed : by_degree) {
    if (placed[seed]) continue;
    const std::size_t root = farthest(farthest(seed));
    const std::size_t start = order.size();
    order.push_back(root);
    placed[root] = 1;
    for (std::size_t h = start; h < order.size(); ++h) {
      const std::size_t u = order[h];
      next.clear();
      for (std::size_t q = ro[u]; q < ro[u + 1]; ++q) {
        const std::size_t v = ci[q];
        if (!placed[v]) {
          placed[v] = 1;
          next.push_back(v);
        }
      }
      std::stable_sort(next.begin(), next.end(),
                       [&](std::size_t a, std::size_t b) { return degree(a) < degree(b); });
      order.insert(order.end(), next.begin(), next.end());
    }
  }
  std::reverse(order.begin(), order.end());
  return order;
}

BandedLu::BandedLu(const SparseMatrix& A, std::size_t max_entries)
    : n_(A.rows()), order_(reverse_cuthill_mckee(A)), position_(A.rows()) {
  for (std::size_t i = 0; i < n_; ++i) position_[order_[i]] = i;
  const auto ro = A.row_offsets();
  const auto ci = A.col_indices();
  const auto va = A.values();
  for (std::size_t i = 0; i < n_; ++i) {
    for (std::size_t q = ro[i]; q < ro[i + 1]; ++q) {
      const std::size_t a = position_[i], b = position_[ci[q]];
      bw_ = std::max(bw_, a > b ? a - b : b - a);
    }
  }
  if (n_ > 0 && 2 * bw_ + 1 > max_entries / n_) {
    throw std::length_error("BandedLu: band of width " + std::to_string(bw_) + " too large");
  }
  band_.assign(n_ * (2 * bw_ + 1), 0.0);
  for (std::size_t i = 0; i < n_; ++i) {
    double* r = row(position_[i]);
    for (std::size_t q = ro[i]; q < ro[i + 1]; ++q) r[position_[ci[q]]] = va[q];
  }

  // Fill stays inside the envelope of the symmetrized pattern: step k only
  // touches rows and columns up to reach[k].
  auto& first = first_;
  auto& reach = reach_;
  first.resize(n_);
  for (std::size_t i = 0; i < n_; ++i) first[i] = i;
  for (std::size_t i = 0; i < n_; ++i) {
    for (std::size_t q = ro[i]; q < ro[i + 1]; ++q) {
      const std::size_t a = position_[i], b = position_[ci[q]];
      first[std::max(a, b)] = std::min(first[std::max(a, b)], std::min(a, b));
    }
  }
  reach.resize(n_);
  for (std::size_t i = 0; i < n_; ++i) reach[i] = i;
  for (std::size_t j = 0; j < n_; ++j) reach[first[j]] = std::max(reach[first[j]], j);
  for (std::size_t k = 1; k < n_; ++k) reach[k] = std::max(reach[k], reach[k - 1]);

  for (std::size_t k = 0; k < n_; ++k) {
    const double* rk = row(k);
    const std::size_t hi = reach[k];
    double scale = 0.0;
    for (std::size_t j = k; j <= hi; ++j) scale = std::max(scale, std::abs(rk[j]));
    const double pivot = rk[k];
    if (!(std::abs(pivot) > 1e-14 * scale) || !std::isfinite(pivot)) {
      throw std::domain_error("BandedLu: zero pivot at position " + std::to_string(k));
    }
    for (std::size_t i = k + 1; i <= hi; ++i) {
      double* ri = row(i);
      if (ri[k] == 0.0) continue;
      const double f = ri[k] / pivot;
      ri[k] = f;
      for (std::size_t j = k + 1; j <= hi; ++j) ri[j] -= f * rk[j];
    }
  }
}

void BandedLu::apply(std::span<const double> r, std::span<double> z) const {
  Vector y(n_);
  for (std::size_t i = 0; i < n_; ++i) y[i] = r[order_[i]];
  for (std::size_t i = 0; i < n_; ++i) {
    const double* ri = row(i);
    double s = y[i];
    for (std::size_t j = first_[i]; j < i; ++j) s -= ri[j] * y[j];
    y[i] = s;
  }
  for (std::size_t i = n_; i-- > 0;) {
    const double* ri = row(i);
    const std::size_t hi = reach_[i];
    double s = y[i];
    for (std::size_t j = i + 1; j <= hi; ++j) s -= ri[j] * y[j];
    y[i] = s / ri[i];
  }
  for (std::size_t i = 0; i < n_; ++i) z[order_[i]] = y[i];
}

Vector BandedLu::solve(std::span<const double> b) const {
  Vector x(n_);
  apply(b, x);
  return x;
}

}  // namespace hybridns
