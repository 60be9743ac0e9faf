#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>

#include "hybridns/banded_lu.hpp"
#include "hybridns/sparse_matrix.hpp"

namespace hybridns {

struct SolverReport {
  std::size_t iterations = 0;
  double relative_residual = 0.0;
  bool converged = false;
  std::string method;
};

struct SolverOptions {
  double tol = 1e-10;
  /// 0 selects 10 * n.
  std::size_t max_iter = 0;
  std::size_t restart = 50;
  /// Iterations allowed with ILU(0) before switching to a banded LU
  /// preconditioner; 0 disables the switch.
  std::size_t fallback_after = 500;
};

/// Thrown when an iterative solve misses its tolerance; never returns a silent
/// bad answer.
class SolverFailure : public std::runtime_error {
 public:
  SolverFailure(const std::string& what, SolverReport report)
      : std::runtime_error(what), report_(std::move(report)) {}
  const SolverReport& report() const { return report_; }

 private:
  SolverReport report_;
};

/// y = Op(x); sizes are fixed by the caller.
using LinearOperator = std::function<void(std::span<const double>, std::span<double>)>;

struct SolveResult {
  Vector x;
  SolverReport report;
};

/// Incomplete LU with zero fill on the pattern of A.
class Ilu0 {
 public:
  /// Throws std::domain_error on a (numerically) zero pivot.
  explicit Ilu0(const SparseMatrix& A);
  void apply(std::span<const double> r, std::span<double> z) const;

 private:
  SparseMatrix lu_;
  std::vector<std::size_t> diag_pos_;
};

/// Point Jacobi; zero diagonal entries are treated as one.
class Jacobi {
 public:
  explicit Jacobi(const SparseMatrix& A);
  explicit Jacobi(Vector inverse_diagonal) : inv_diag_(std::move(inverse_diagonal)) {}
  void apply(std::span<const double> r, std::span<double> z) const;

 private:
  Vector inv_diag_;
};

/// ILU(0) of A, or Jacobi when ILU(0) hits a zero pivot. `name` receives the
/// choice.
LinearOperator make_ilu_or_jacobi(const SparseMatrix& A, std::string* name = nullptr);

/// Restarted right-preconditioned GMRES from a zero initial guess. Reports
/// the true relative residual ||b - Ax|| / ||b||; does not throw on
/// non-convergence.
SolveResult gmres(const LinearOperator& A, const LinearOperator& preconditioner,
                  std::span<const double> b, const SolverOptions& options);

/// Preconditioned conjugate gradients from a zero initial guess.
SolveResult pcg(const LinearOperator& A, const LinearOperator& preconditioner,
                std::span<const double> b, const SolverOptions& options);

/// GMRES(50) + ILU(0)/Jacobi. When ILU(0) stalls for options.fallback_after
/// iterations, GMRES restarts with a banded LU of the matrix as preconditioner.
/// The factorization is kept and reused on later solves while it converges
/// within reuse_budget iterations; otherwise it is rebuilt, and after a failed
/// reuse the next few solves (doubling up to 32) refactor directly. Throws
/// SolverFailure when tol is not reached within max_iter in total.
class NonsymmetricSolver {
 public:
  explicit NonsymmetricSolver(SolverOptions options = {}, std::size_t reuse_budget = 40);

  SolveResult solve(const SparseMatrix& A, std::span<const double> b);
  /// Solves op(x) = b, building preconditioners from P (an approximation of op).
  SolveResult solve(const LinearOperator& op, const SparseMatrix& P, std::span<const double> b);

  bool using_banded_lu() const { return static_cast<bool>(lu_); }

 private:
  SolverOptions options_;
  std::size_t reuse_budget_;
  std::shared_ptr<const BandedLu> lu_;
  std::size_t skip_reuse_ = 0;
  std::size_t backoff_ = 0;
};

/// One-shot NonsymmetricSolver solve.
SolveResult solve_nonsymmetric(const SparseMatrix& A, std::span<const double> b,
                               double tol = 1e-10, std::size_t max_iter = 0);

/// Jacobi-preconditioned CG. Throws SolverFailure when tol is not reached.
SolveResult solve_spd(const SparseMatrix& A, std::span<const double> b, double tol = 1e-10,
                      std::size_t max_iter = 0);

/// Reusable SPD solver bound to one matrix (e.g. the pressure mass matrix).
class SpdSolver {
 public:
  SpdSolver(const SparseMatrix& A, double tol, std::size_t max_iter = 0);
  Vector solve(std::span<const double> b) const;
  SolveResult solve_with_report(std::span<const double> b) const;
  const SparseMatrix& matrix() const { return *A_; }

 private:
  const SparseMatrix* A_;
  Jacobi jacobi_;
  SolverOptions options_;
};

}  // namespace hybridns
