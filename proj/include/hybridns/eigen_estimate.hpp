#pragma once

#include <cstddef>

#include "hybridns/fespace.hpp"

namespace hybridns {

enum class LaplacianBc { neumann_zero_mean, dirichlet };

struct EigenEstimate {
  double sigma_min = 0.0;
  std::size_t iterations = 0;
  double relative_change = 0.0;
};

/// Smallest (nonzero for Neumann) eigenvalue of the P1 problem K c = sigma Mp c
/// by inverse power iteration. Throws std::runtime_error when the iteration
/// stagnates before reaching `tol` relative change.
EigenEstimate smallest_laplacian_eigenvalue(const TriMesh& mesh, const DofMap& dofmap,
                                            LaplacianBc bc, double tol = 1e-6,
                                            std::size_t max_iterations = 500);

enum class DampingVerdict { overdamped, not_overdamped };

struct OverdampingCheck {
  DampingVerdict verdict;
  /// sqrt(sigma_min) - alpha / beta
  double margin;
};

/// Overdamped iff alpha / beta < sqrt(sigma_min) (strict). All inputs must be
/// positive.
OverdampingCheck check_overdamping(double alpha, double beta, double sigma_min);

const char* to_string(DampingVerdict v);

}  // namespace hybridns
