#include <memory>
#include <stdexcept>

#include "hybridns/schemes.hpp"

namespace hybridns {

// Schur complement CG: with F = nu A (boundary rows replaced) factored once,
//   u = u0 + F^-1 B^T p,   B F^-1 B^T p = -B u0,
// with pressure dof 0 pinned and diag(Mp)/nu as preconditioner.
State solve_steady_stokes(const Discretization& disc, double nu, StokesOptions options,
                          SolverReport* report) {
  if (!(nu > 0.0)) throw std::invalid_argument("solve_steady_stokes: nu must be positive");
  const std::size_t nv = disc.n_velocity();
  const std::size_t pinned = 0;

  SparseMatrix F = disc.A().scaled(nu);
  F.replace_rows_with_identity(disc.dirichlet_dofs());
  std::unique_ptr<BandedLu> lu;
  try {
    lu = std::make_unique<BandedLu>(F);
  } catch (const std::exception& e) {
    throw SolverFailure(std::string("steady Stokes: ") + e.what(), {0, 1.0, false, "banded-lu"});
  }
  std::vector<char> mask(nv, 0);
  for (auto i : disc.dirichlet_dofs()) mask[i] = 1;

  Vector rhs_u = disc.load(0.0);
  const Vector g = disc.dirichlet_values(0.0);
  for (auto i : disc.dirichlet_dofs()) rhs_u[i] = g[i];
  const Vector u0 = lu->solve(rhs_u);

  // F^-1 B^T p with zero boundary rows.
  auto lift = [&](std::span<const double> p) {
    Vector v = disc.Bt() * p;
    for (std::size_t i = 0; i < nv; ++i) {
      if (mask[i]) v[i] = 0.0;
    }
    return lu->solve(v);
  };
  const LinearOperator schur = [&](std::span<const double> p, std::span<double> y) {
    Vector q(p.begin(), p.end());
    q[pinned] = 0.0;
    const Vector Bu = disc.B() * lift(q);
    std::copy(Bu.begin(), Bu.end(), y.begin());
    y[pinned] = p[pinned];
  };
  Vector inv_diag = disc.Mp().diagonal();
  for (auto& d : inv_diag) d = nu / d;
  inv_diag[pinned] = 1.0;
  const Jacobi pc(std::move(inv_diag));

  Vector rhs_p = disc.B() * u0;
  for (auto& v : rhs_p) v = -v;
  rhs_p[pinned] = 0.0;

  SolverOptions opts;
  opts.tol = options.tol;
  opts.max_iter = options.max_iter;
  auto sol = pcg(schur, [&pc](std::span<const double> r, std::span<double> z) { pc.apply(r, z); },
                 rhs_p, opts);
  sol.report.method = "schur-cg+banded-lu";
  if (!sol.report.converged) throw SolverFailure("steady Stokes solve did not converge", sol.report);
  if (report) *report = sol.report;

  State s;
  s.lambda = std::move(sol.x);
  s.lambda[pinned] = 0.0;
  s.w = u0;
  const Vector du = lift(s.lambda);
  for (std::size_t i = 0; i < nv; ++i) s.w[i] += du[i];
  disc.subtract_pressure_mean(s.lambda);
  return s;
}

State initial_state(const Discretization& disc, const ProblemDef& problem, double nu) {
  if (problem.stokes_initial) return solve_steady_stokes(disc, nu);
  State s;
  s.w = interpolate_velocity(disc.dofmap(), problem.u0, 0.0);
  s.lambda = interpolate_pressure(disc.dofmap(), problem.p0, 0.0);
  const Vector g = disc.dirichlet_values(0.0);
  for (auto i : disc.dirichlet_dofs()) s.w[i] = g[i];
  if (disc.pressure_mean_gauge()) disc.subtract_pressure_mean(s.lambda);
  return s;
}

}  // namespace hybridns
