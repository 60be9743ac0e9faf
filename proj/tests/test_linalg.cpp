#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <numbers>
#include <random>

#include "hybridns/banded_lu.hpp"
#include "hybridns/eigen_estimate.hpp"
#include "hybridns/fespace.hpp"
#include "hybridns/krylov.hpp"

using namespace hybridns;

namespace {

Eigen::MatrixXd dense(const SparseMatrix& A) {
  Eigen::MatrixXd D = Eigen::MatrixXd::Zero(A.rows(), A.cols());
  for (std::size_t i = 0; i < A.rows(); ++i) {
    for (std::size_t q = A.row_offsets()[i]; q < A.row_offsets()[i + 1]; ++q) {
      D(i, A.col_indices()[q]) = A.values()[q];
    }
  }
  return D;
}

Vector dense_solve(const SparseMatrix& A, std::span<const double> b) {
  const Eigen::VectorXd bb = Eigen::Map<const Eigen::VectorXd>(b.data(), b.size());
  const Eigen::VectorXd x = dense(A).fullPivLu().solve(bb);
  return Vector(x.data(), x.data() + x.size());
}

double rel_diff(std::span<const double> a, std::span<const double> b) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    num += (a[i] - b[i]) * (a[i] - b[i]);
    den += b[i] * b[i];
  }
  return std::sqrt(num / den);
}

// Convection-diffusion stencil with a heavy symmetric rank-deficient term.
SparseMatrix stiff_nonsymmetric(std::size_t n, double penalty) {
  std::vector<SparseMatrix::Triplet> t;
  for (std::size_t i = 0; i < n; ++i) {
    t.push_back({i, i, 2.0 + 0.01});
    if (i + 1 < n) {
      t.push_back({i, i + 1, -1.0 + 0.3});
      t.push_back({i + 1, i, -1.0 - 0.3});
    }
    if (i + 7 < n) {
      t.push_back({i, i, penalty});
      t.push_back({i + 7, i + 7, penalty});
      t.push_back({i, i + 7, -penalty});
      t.push_back({i + 7, i, -penalty});
    }
  }
  return SparseMatrix::from_triplets(n, n, std::move(t));
}

}  // namespace

TEST_CASE("sparse matrix basics") {
  const SparseMatrix A = SparseMatrix::from_triplets(2, 3, {{0, 2, 1.0}, {1, 0, 2.0}, {0, 2, 0.5}});
  CHECK(A.at(0, 2) == 1.5);
  CHECK(A.at(0, 0) == 0.0);
  CHECK(A.nnz() == 2);
  const SparseMatrix T = A.transpose();
  CHECK(T.rows() == 3);
  CHECK(T.at(2, 0) == 1.5);
  const Vector y = A * Vector{1.0, 2.0, 3.0};
  CHECK(y == Vector{4.5, 2.0});
  CHECK(A.multiply_transpose(Vector{1.0, 1.0}) == Vector{2.0, 0.0, 1.5});

  SparseMatrix B = SparseMatrix::from_dense({{1, 2}, {3, 4}});
  B.replace_rows_with_identity(std::vector<std::size_t>{1});
  CHECK(B.at(1, 0) == 0.0);
  CHECK(B.at(1, 1) == 1.0);
  CHECK(B.at(0, 1) == 2.0);

  const SparseMatrix I = SparseMatrix::identity(2);
  const SparseMatrix K = block_matrix(2, 2, 2, 2, &I, nullptr, nullptr, &I);
  CHECK(K.rows() == 4);
  CHECK(K.at(3, 3) == 1.0);
  CHECK(K.at(0, 3) == 0.0);
}

TEST_CASE("nonsymmetric solve examples") {
  const Vector b{0.3, -1.0, 2.0};
  const SolveResult id = solve_nonsymmetric(SparseMatrix::identity(3), b);
  CHECK(id.x == b);
  CHECK(id.report.iterations == 1);

  const SolveResult r = solve_nonsymmetric(SparseMatrix::from_dense({{4, 1}, {1, 3}}), Vector{1, 2});
  CHECK(std::abs(r.x[0] - 1.0 / 11) < 1e-10);
  CHECK(std::abs(r.x[1] - 7.0 / 11) < 1e-10);
  CHECK(r.report.converged);

  CHECK_THROWS_AS(solve_nonsymmetric(SparseMatrix::from_dense({{1, 0}, {0, 0}}), Vector{1, 1}),
                  SolverFailure);
}

TEST_CASE("spd solve examples") {
  const SolveResult d = solve_spd(SparseMatrix::from_dense({{2, 0}, {0, 5}}), Vector{2, 10});
  CHECK(std::abs(d.x[0] - 1.0) < 1e-12);
  CHECK(std::abs(d.x[1] - 2.0) < 1e-12);
  CHECK(solve_spd(SparseMatrix::identity(4), Vector{1, 2, 3, 4}).x == Vector{1, 2, 3, 4});

  const TriMesh m = generate_rect_mesh({0, 1}, {0, 1}, 1, 1);
  const SparseMatrix Mp = assemble_pressure_mass(DofMap(m));
  const Vector b{1.0, -2.0, 0.5, 3.0};
  const SolveResult s = solve_spd(Mp, b, 1e-13);
  CHECK(rel_diff(s.x, dense_solve(Mp, b)) < 1e-10);
}

TEST_CASE("gmres agrees with a dense factorization") {
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  for (std::size_t n : {5u, 40u, 150u}) {
    std::vector<SparseMatrix::Triplet> t;
    for (std::size_t i = 0; i < n; ++i) {
      t.push_back({i, i, 4.0});
      for (int k = 0; k < 3; ++k) t.push_back({i, rng() % n, U(rng)});
    }
    const SparseMatrix A = SparseMatrix::from_triplets(n, n, std::move(t));
    Vector b(n);
    for (auto& x : b) x = U(rng);
    const double tol = 1e-10;
    const SolveResult r = solve_nonsymmetric(A, b, tol);
    CHECK(rel_diff(r.x, dense_solve(A, b)) < 10 * tol * dense(A).inverse().norm() * dense(A).norm());
  }
}

TEST_CASE("reverse Cuthill-McKee is a permutation that narrows the band") {
  const TriMesh m = generate_rect_mesh({0, 4}, {0, 1}, 24, 6);
  const SparseMatrix A = assemble_stiffness(DofMap(m));
  const auto order = reverse_cuthill_mckee(A);
  std::vector<char> seen(A.rows(), 0);
  for (auto i : order) seen.at(i) = 1;
  CHECK(std::count(seen.begin(), seen.end(), 1) == static_cast<long>(A.rows()));
  // Component-blocked numbering couples dof i with dof n/2 + i.
  const BandedLu lu(A.scaled(1.0));
  CHECK(lu.bandwidth() < A.rows() / 4);
}

TEST_CASE("banded LU matches a dense solve") {
  const SparseMatrix A = stiff_nonsymmetric(120, 1e4);
  const BandedLu lu(A);
  Vector b(A.rows());
  for (std::size_t i = 0; i < b.size(); ++i) b[i] = std::cos(0.3 * i);
  CHECK(rel_diff(lu.solve(b), dense_solve(A, b)) < 1e-9);

  CHECK_THROWS_AS(BandedLu(SparseMatrix::from_dense({{0, 1}, {1, 0}})), std::domain_error);
  CHECK_THROWS_AS(BandedLu(A, 100), std::length_error);
}

TEST_CASE("nonsymmetric solver switches to the banded LU and reuses it") {
  SolverOptions o;
  o.tol = 1e-10;
  o.fallback_after = 5;
  NonsymmetricSolver solver(o);
  const SparseMatrix A = stiff_nonsymmetric(200, 1e4);
  Vector b(A.rows(), 1.0);
  const SolveResult first = solver.solve(A, b);
  CHECK(solver.using_banded_lu());
  CHECK(first.report.method.find("banded-lu") != std::string::npos);
  CHECK(rel_diff(first.x, dense_solve(A, b)) < 1e-6);

  const SolveResult second = solver.solve(A, b);
  CHECK(second.report.method == "gmres+banded-lu (reused)");
  CHECK(second.report.iterations < o.fallback_after);

  SolverOptions off = o;
  off.fallback_after = 0;
  off.max_iter = 5;
  NonsymmetricSolver strict(off);
  CHECK_THROWS_AS(strict.solve(A, b), SolverFailure);
}

TEST_CASE("smallest Laplacian eigenvalue on the unit square") {
  const double pi2 = std::numbers::pi * std::numbers::pi;
  const TriMesh m32 = generate_rect_mesh({0, 1}, {0, 1}, 32, 32);
  const DofMap d32(m32);
  const double neumann = smallest_laplacian_eigenvalue(m32, d32, LaplacianBc::neumann_zero_mean).sigma_min;
  const double dirichlet = smallest_laplacian_eigenvalue(m32, d32, LaplacianBc::dirichlet).sigma_min;
  CHECK(std::abs(neumann - pi2) / pi2 < 0.03);
  CHECK(std::abs(dirichlet - 2 * pi2) / (2 * pi2) < 0.03);

  const TriMesh m8 = generate_rect_mesh({0, 1}, {0, 1}, 8, 8);
  const double coarse = smallest_laplacian_eigenvalue(m8, DofMap(m8), LaplacianBc::neumann_zero_mean).sigma_min;
  CHECK(std::abs(coarse - neumann) < std::abs(coarse - pi2));
}

TEST_CASE("overdamping verdicts") {
  const double dt = 0.01;
  const auto a = check_overdamping(std::pow(dt, -0.5), 1.0 / dt, 9.87);
  CHECK(a.verdict == DampingVerdict::overdamped);
  CHECK(a.margin == doctest::Approx(std::sqrt(9.87) - 0.1));

  CHECK(check_overdamping(2.0, 2.0, 0.25).verdict == DampingVerdict::not_overdamped);
  const auto edge = check_overdamping(1.0, 2.0, 0.25);
  CHECK(edge.verdict == DampingVerdict::not_overdamped);
  CHECK(edge.margin == 0.0);
  CHECK_THROWS_AS(check_overdamping(0.0, 1.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(check_overdamping(1.0, -1.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(check_overdamping(1.0, 1.0, 0.0), std::invalid_argument);
}
