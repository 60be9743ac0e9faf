#include "hybridns/eigen_estimate.hpp"

#include <cmath>
#include <stdexcept>

namespace hybridns {

namespace {

SparseMatrix submatrix(const SparseMatrix& A, const std::vector<std::size_t>& keep,
                       std::size_t n_full) {
  std::vector<std::size_t> index(n_full, SparseMatrix::npos);
  for (std::size_t i = 0; i < keep.size(); ++i) index[keep[i]] = i;
  std::vector<SparseMatrix::Triplet> trips;
  const auto ro = A.row_offsets();
  const auto ci = A.col_indices();
  const auto va = A.values();
  for (std::size_t i = 0; i < keep.size(); ++i) {
    const std::size_t r = keep[i];
    for (std::size_t k = ro[r]; k < ro[r + 1]; ++k) {
      if (index[ci[k]] != SparseMatrix::npos) trips.push_back({i, index[ci[k]], va[k]});
    }
  }
  return SparseMatrix::from_triplets(keep.size(), keep.size(), std::move(trips));
}

// Removes the Mp-weighted mean so x is Mp-orthogonal to constants.
void deflate_constant(const Vector& mass_ones, double area, Vector& x) {
  const double mean = dot(mass_ones, x) / area;
  for (auto& v : x) v -= mean;
}

}  // namespace

EigenEstimate smallest_laplacian_eigenvalue(const TriMesh& mesh, const DofMap& dofmap,
                                            LaplacianBc bc, double tol,
                                            std::size_t max_iterations) {
  const TaylorHoodScatter scatter(dofmap);
  SparseMatrix K = assemble_pressure_stiffness(dofmap, scatter);
  SparseMatrix Mp = assemble_pressure_mass(dofmap, scatter);
  const bool neumann = bc == LaplacianBc::neumann_zero_mean;

  std::vector<Point2> where;
  if (!neumann) {
    std::vector<char> on_boundary(mesh.n_vertices(), 0);
    for (const auto& be : mesh.boundary_edges()) {
      on_boundary[be.vertices[0]] = 1;
      on_boundary[be.vertices[1]] = 1;
    }
    std::vector<std::size_t> interior;
    for (std::size_t i = 0; i < mesh.n_vertices(); ++i) {
      if (!on_boundary[i]) interior.push_back(i);
    }
    if (interior.empty()) throw std::invalid_argument("eigenvalue: mesh has no interior vertex");
    K = submatrix(K, interior, mesh.n_vertices());
    Mp = submatrix(Mp, interior, mesh.n_vertices());
    for (auto i : interior) where.push_back(mesh.vertices()[i]);
  } else {
    where = mesh.vertices();
  }

  const std::size_t n = K.rows();
  Vector ones(n, 1.0);
  const Vector mass_ones = Mp * ones;
  const double area = dot(mass_ones, ones);

  // Smooth deterministic start with components along the low modes.
  Vector x(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& p = where[i];
    x[i] = 1.0 + p.x + 0.37 * p.y + 0.11 * p.x * p.y;
  }
  if (neumann) deflate_constant(mass_ones, area, x);

  // The Rayleigh quotient is second order in the solve error.
  const SpdSolver k_solver(K, 1e-10, 20 * n);
  double sigma = 0.0;
  EigenEstimate out;
  for (std::size_t it = 1; it <= max_iterations; ++it) {
    const double mnorm = std::sqrt(quadratic_form(Mp, x, x));
    if (!(mnorm > 0.0)) throw std::runtime_error("eigenvalue: iterate collapsed to zero");
    for (auto& v : x) v /= mnorm;
    Vector rhs = Mp * x;
    if (neumann) {
      // Keep the singular system consistent against roundoff.
      const double drift = dot(rhs, ones) / static_cast<double>(n);
      for (auto& v : rhs) v -= drift;
    }
    Vector y = k_solver.solve(rhs);
    if (neumann) deflate_constant(mass_ones, area, y);
    const double next = quadratic_form(K, y, y) / quadratic_form(Mp, y, y);
    const double change = it == 1 ? 1.0 : std::abs(next - sigma) / next;
    sigma = next;
    x = std::move(y);
    out = {sigma, it, change};
    if (it > 1 && change <= tol) return out;
  }
  throw std::runtime_error("eigenvalue: inverse iteration stagnated (relative change " +
                           std::to_string(out.relative_change) + " after " +
                           std::to_string(out.iterations) + " iterations)");
}

OverdampingCheck check_overdamping(double alpha, double beta, double sigma_min) {
  if (!(alpha > 0.0) || !(beta > 0.0) || !(sigma_min > 0.0)) {
    throw std::invalid_argument("check_overdamping: alpha, beta and sigma_min must be positive");
  }
  const double root = std::sqrt(sigma_min);
  const double ratio = alpha / beta;
  return {ratio < root ? DampingVerdict::overdamped : DampingVerdict::not_overdamped, root - ratio};
}

const char* to_string(DampingVerdict v) {
  return v == DampingVerdict::overdamped ? "overdamped" : "not_overdamped";
}

}  // namespace hybridns
