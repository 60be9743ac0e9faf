#include <algorithm>
#include <cmath>

#include "hybridns/schemes.hpp"

namespace hybridns {

namespace {

SparseMatrix combine(std::initializer_list<ScaledMatrix> terms) {
  return linear_combination(std::span<const ScaledMatrix>(terms.begin(), terms.size()));
}

// Row replacement: identity rows in K, boundary data in rhs.
void impose_dirichlet(SparseMatrix& K, Vector& rhs, const std::vector<std::size_t>& dofs,
                      const Vector& g) {
  K.replace_rows_with_identity(dofs);
  for (auto i : dofs) rhs[i] = g[i];
}

std::vector<char> boundary_mask(const Discretization& disc) {
  std::vector<char> mask(disc.n_velocity(), 0);
  for (auto i : disc.dirichlet_dofs()) mask[i] = 1;
  return mask;
}

void record_solve(StepDiagnostics& d, const SolverReport& r) {
  d.iterations += r.iterations;
  d.reports.push_back(r);
}

Vector scaled_sum(double a, const Vector& x, double b, const Vector& y) {
  Vector out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = a * x[i] + b * y[i];
  return out;
}

bool is_hybrid_be(Method m) {
  return m == Method::hybrid_be_coupled || m == Method::hybrid_be_decoupled_proj ||
         m == Method::hybrid_be_decoupled;
}

}  // namespace

GradDivCoefficients be_coefficients(const SchemeConfig& c) {
  const double k = c.dt;
  switch (c.method) {
    case Method::pp_be:
    case Method::pp_be_filtered:
      return {2.0 * c.beta, 0.0, false, 2.0 * c.beta, 0.0};
    case Method::ac_be:
    case Method::ac_be_filtered:
      return {k * c.alpha2, 0.0, true, k * c.alpha2, 0.0};
    default: {
      const double ci = k * c.alpha2 + 2.0 * c.beta;
      return {ci, 2.0 * c.beta, true, ci, 2.0 * c.beta};
    }
  }
}

GradDivCoefficients trapezoidal_coefficients(const SchemeConfig& c) {
  const double k = c.dt;
  switch (c.method) {
    case Method::pp_trapezoidal:
      return {c.beta, -c.beta, false, 2.0 * c.beta, 0.0};
    case Method::ac_trapezoidal:
      return {0.25 * k * c.alpha2, -0.25 * k * c.alpha2, true, 0.5 * k * c.alpha2,
              -0.5 * k * c.alpha2};
    default:
      return {0.25 * k * c.alpha2 + c.beta, c.beta - 0.25 * k * c.alpha2, true,
              0.5 * k * c.alpha2 + 2.0 * c.beta, 2.0 * c.beta - 0.5 * k * c.alpha2};
  }
}

SparseMatrix be_velocity_matrix(const Discretization& disc, const SparseMatrix& N, double nu,
                                double dt, double c_graddiv) {
  return combine({{1.0 / dt, &disc.M()}, {1.0, &N}, {nu, &disc.A()}, {c_graddiv, &disc.G()}});
}

void apply_time_filter(std::span<const double> prev, std::span<const double> curr,
                       std::span<double> next, double mu) {
  if (prev.size() != curr.size() || curr.size() != next.size()) {
    throw std::invalid_argument("apply_time_filter: size mismatch");
  }
  for (std::size_t i = 0; i < next.size(); ++i) {
    next[i] -= 0.5 * mu * (next[i] - 2.0 * curr[i] + prev[i]);
  }
}

namespace {

SolverOptions solver_options(const SchemeConfig& c) {
  SolverOptions o;
  o.tol = c.tol;
  o.max_iter = c.max_iter;
  return o;
}

}  // namespace

Stepper::Stepper(const Discretization& disc, SchemeConfig config)
    : disc_(disc), config_(config), solver_(solver_options(config)) {
  config_.validate();
}

StepDiagnostics Stepper::step(State& s) const {
  if (s.w.size() != disc_.n_velocity() || s.lambda.size() != disc_.n_pressure()) {
    throw std::invalid_argument("Stepper::step: state does not match the discretization");
  }
  const Vector w0 = s.w;
  const Vector l0 = s.lambda;
  StepDiagnostics d;
  switch (config_.method) {
    case Method::hybrid_be_coupled: d = step_coupled(s); break;
    case Method::hybrid_be_decoupled_proj: d = step_projected(s); break;
    case Method::hybrid_trapezoidal:
    case Method::pp_trapezoidal:
    case Method::ac_trapezoidal: d = step_trapezoidal(s); break;
    default: d = step_decoupled(s); break;
  }
  // The filter needs level n-1, so the first step is left unfiltered.
  if (is_filtered(config_.method) && s.has_prev) {
    apply_time_filter(s.w_prev, w0, s.w, config_.mu);
    apply_time_filter(s.lambda_prev, l0, s.lambda, config_.mu);
  }
  if (disc_.pressure_mean_gauge()) disc_.subtract_pressure_mean(s.lambda);
  s.w_prev = w0;
  s.lambda_prev = l0;
  s.has_prev = true;
  s.t += config_.dt;
  ++s.step;
  return d;
}

StepDiagnostics Stepper::step_decoupled(State& s) const {
  const double k = config_.dt;
  const auto c = be_coefficients(config_);
  const double t1 = s.t + k;
  const SparseMatrix N = assemble_convection(disc_.dofmap(), disc_.scatter(), s.w);
  SparseMatrix K = be_velocity_matrix(disc_, N, config_.nu, k, c.implicit_graddiv);

  const Vector Mw = disc_.M() * s.w;
  const Vector F = disc_.load(t1);
  const Vector Gw = disc_.G() * s.w;
  const Vector Btl = disc_.Bt() * s.lambda;
  Vector rhs(disc_.n_velocity());
  for (std::size_t i = 0; i < rhs.size(); ++i) {
    rhs[i] = Mw[i] / k + F[i] + c.explicit_graddiv * Gw[i];
    if (c.keep_lambda) rhs[i] += Btl[i];
  }
  impose_dirichlet(K, rhs, disc_.dirichlet_dofs(), disc_.dirichlet_values(t1));

  StepDiagnostics d;
  auto sol = solver_.solve(K, rhs);
  record_solve(d, sol.report);

  const Vector Bw0 = disc_.B() * s.w;
  const Vector Bw1 = disc_.B() * sol.x;
  const Vector delta =
      disc_.solve_pressure_mass(scaled_sum(-c.pressure_implicit, Bw1, c.pressure_explicit, Bw0));
  State before = s;
  s.w = std::move(sol.x);
  if (c.keep_lambda) {
    for (std::size_t i = 0; i < delta.size(); ++i) s.lambda[i] += delta[i];
  } else {
    s.lambda = delta;
  }
  if (is_hybrid_be(config_.method)) energy_balance(before, s, N, F, d);
  return d;
}

StepDiagnostics Stepper::step_coupled(State& s) const {
  const double k = config_.dt;
  const double t1 = s.t + k;
  const std::size_t nv = disc_.n_velocity();
  const std::size_t np = disc_.n_pressure();
  const SparseMatrix N = assemble_convection(disc_.dofmap(), disc_.scatter(), s.w);
  const SparseMatrix K0 = combine({{1.0 / k, &disc_.M()}, {1.0, &N}, {config_.nu, &disc_.A()}});
  const SparseMatrix negBt = disc_.Bt().scaled(-1.0);
  const SparseMatrix C = disc_.B().scaled(2.0 * config_.beta / k + config_.alpha2);
  const SparseMatrix D = disc_.Mp().scaled(1.0 / k);
  SparseMatrix S = block_matrix(nv, np, nv, np, &K0, &negBt, &C, &D);

  const Vector Mw = disc_.M() * s.w;
  const Vector F = disc_.load(t1);
  const Vector Mpl = disc_.Mp() * s.lambda;
  const Vector Bw0 = disc_.B() * s.w;
  Vector rhs(nv + np);
  for (std::size_t i = 0; i < nv; ++i) rhs[i] = Mw[i] / k + F[i];
  for (std::size_t q = 0; q < np; ++q) rhs[nv + q] = Mpl[q] / k + 2.0 * config_.beta / k * Bw0[q];
  Vector g(nv + np, 0.0);
  const Vector gv = disc_.dirichlet_values(t1);
  std::copy(gv.begin(), gv.end(), g.begin());
  impose_dirichlet(S, rhs, disc_.dirichlet_dofs(), g);

  StepDiagnostics d;
  auto sol = solver_.solve(S, rhs);
  record_solve(d, sol.report);
  State before = s;
  s.w.assign(sol.x.begin(), sol.x.begin() + static_cast<std::ptrdiff_t>(nv));
  s.lambda.assign(sol.x.begin() + static_cast<std::ptrdiff_t>(nv), sol.x.end());
  energy_balance(before, s, N, F, d);
  return d;
}

StepDiagnostics Stepper::step_projected(State& s) const {
  const double k = config_.dt;
  const double t1 = s.t + k;
  const double c = k * config_.alpha2 + 2.0 * config_.beta;
  const double b2 = 2.0 * config_.beta;
  const std::size_t nv = disc_.n_velocity();
  const SparseMatrix N = assemble_convection(disc_.dofmap(), disc_.scatter(), s.w);
  const SparseMatrix K0 = combine({{1.0 / k, &disc_.M()}, {1.0, &N}, {config_.nu, &disc_.A()}});
  SparseMatrix Kbc = K0;
  Kbc.replace_rows_with_identity(disc_.dirichlet_dofs());
  const auto mask = boundary_mask(disc_);

  // y = Kbc x + c B^T Mp^-1 B x on the interior rows.
  const LinearOperator op = [&](std::span<const double> x, std::span<double> y) {
    Kbc.multiply(x, y);
    const Vector z = disc_.Bt() * disc_.projected_divergence(x);
    for (std::size_t i = 0; i < nv; ++i) {
      if (!mask[i]) y[i] += c * z[i];
    }
  };
  SparseMatrix P = combine({{1.0, &K0}, {c, &disc_.G()}});
  P.replace_rows_with_identity(disc_.dirichlet_dofs());

  const Vector Mw = disc_.M() * s.w;
  const Vector F = disc_.load(t1);
  const Vector Btl = disc_.Bt() * s.lambda;
  const Vector pdiv0 = disc_.projected_divergence(s.w);
  const Vector Btp = disc_.Bt() * pdiv0;
  Vector rhs(nv);
  for (std::size_t i = 0; i < nv; ++i) rhs[i] = Mw[i] / k + F[i] + Btl[i] + b2 * Btp[i];
  const Vector g = disc_.dirichlet_values(t1);
  for (auto i : disc_.dirichlet_dofs()) rhs[i] = g[i];

  auto sol = solver_.solve(op, P, rhs);
  sol.report.method += " (projected grad-div)";
  StepDiagnostics d;
  record_solve(d, sol.report);

  const Vector Bw0 = disc_.B() * s.w;
  const Vector Bw1 = disc_.B() * sol.x;
  const Vector delta = disc_.solve_pressure_mass(scaled_sum(-c, Bw1, b2, Bw0));
  State before = s;
  s.w = std::move(sol.x);
  for (std::size_t i = 0; i < delta.size(); ++i) s.lambda[i] += delta[i];
  energy_balance(before, s, N, F, d);
  return d;
}

StepDiagnostics Stepper::step_trapezoidal(State& s) const {
  const double k = config_.dt;
  const double t1 = s.t + k;
  const auto c = trapezoidal_coefficients(config_);
  // Extrapolated transport velocity; w_{-1} = w_0 on the first step.
  const Vector& wm = s.has_prev ? s.w_prev : s.w;
  const Vector wstar = scaled_sum(1.5, s.w, -0.5, wm);
  const SparseMatrix N = assemble_convection(disc_.dofmap(), disc_.scatter(), wstar);
  SparseMatrix K = combine({{1.0 / k, &disc_.M()},
                            {0.5, &N},
                            {0.5 * config_.nu, &disc_.A()},
                            {c.implicit_graddiv, &disc_.G()}});

  const Vector Mw = disc_.M() * s.w;
  const Vector Nw = N * s.w;
  const Vector Aw = disc_.A() * s.w;
  const Vector Gw = disc_.G() * s.w;
  const Vector Btl = disc_.Bt() * s.lambda;
  const Vector F = disc_.load(s.t + 0.5 * k);
  Vector rhs(disc_.n_velocity());
  for (std::size_t i = 0; i < rhs.size(); ++i) {
    rhs[i] = Mw[i] / k - 0.5 * Nw[i] - 0.5 * config_.nu * Aw[i] + c.explicit_graddiv * Gw[i] +
             F[i];
    if (c.keep_lambda) rhs[i] += Btl[i];
  }
  impose_dirichlet(K, rhs, disc_.dirichlet_dofs(), disc_.dirichlet_values(t1));

  StepDiagnostics d;
  auto sol = solver_.solve(K, rhs);
  record_solve(d, sol.report);

  const Vector Bw0 = disc_.B() * s.w;
  const Vector Bw1 = disc_.B() * sol.x;
  const Vector delta =
      disc_.solve_pressure_mass(scaled_sum(-c.pressure_implicit, Bw1, c.pressure_explicit, Bw0));
  s.w = std::move(sol.x);
  if (c.keep_lambda) {
    for (std::size_t i = 0; i < delta.size(); ++i) s.lambda[i] += delta[i];
  } else {
    s.lambda = delta;
  }
  return d;
}

void Stepper::energy_balance(const State& before, const State& after, const SparseMatrix& N,
                             std::span<const double> F, StepDiagnostics& d) const {
  const double k = config_.dt;
  const double beta = config_.beta;
  const auto& w0 = before.w;
  const auto& w1 = after.w;
  const Vector pdiv0 = disc_.projected_divergence(w0);
  const Vector pdiv1 = disc_.projected_divergence(w1);
  Vector L0 = before.lambda, L1 = after.lambda;
  for (std::size_t i = 0; i < L0.size(); ++i) {
    L0[i] += 2.0 * beta * pdiv0[i];
    L1[i] += 2.0 * beta * pdiv1[i];
  }
  const Vector dw = scaled_sum(1.0, w1, -1.0, w0);
  const Vector dL = scaled_sum(1.0, L1, -1.0, L0);
  const auto& M = disc_.M();
  const auto& Mp = disc_.Mp();

  EnergyTerms e;
  e.kinetic = 0.5 * (quadratic_form(M, w1, w1) - quadratic_form(M, w0, w0) +
                     quadratic_form(M, dw, dw));
  e.compression = config_.alpha2 > 0.0
                      ? 0.5 / config_.alpha2 *
                            (quadratic_form(Mp, L1, L1) - quadratic_form(Mp, L0, L0) +
                             quadratic_form(Mp, dL, dL))
                      : std::numeric_limits<double>::quiet_NaN();
  e.penalty = 2.0 * beta * k * dot(disc_.B() * w1, pdiv1);
  e.viscous = k * config_.nu * quadratic_form(disc_.A(), w1, w1);
  e.convection = k * quadratic_form(N, w1, w1);
  e.forcing = k * dot(F, w1);

  // Momentum residual without boundary replacement; only boundary rows count.
  const Vector Mdw = M * dw;
  const Vector Nw = N * w1;
  const Vector Aw = disc_.A() * w1;
  const Vector Btl = disc_.Bt() * after.lambda;
  double work = 0.0;
  for (auto i : disc_.dirichlet_dofs()) {
    const double r = Mdw[i] / k + Nw[i] + config_.nu * Aw[i] - Btl[i] - F[i];
    work += w1[i] * r;
  }
  e.boundary_work = k * work;

  const double strict_scale = std::max({std::abs(e.kinetic), std::abs(e.compression),
                                        std::abs(e.penalty), std::abs(e.viscous),
                                        std::abs(e.forcing)});
  const double scale = std::max({strict_scale, std::abs(e.convection), std::abs(e.boundary_work)});
  const double strict = e.kinetic + e.compression + e.penalty + e.viscous - e.forcing;
  const double general = strict + e.convection - e.boundary_work;
  e.residual_strict = strict_scale > 0.0 ? std::abs(strict) / strict_scale : 0.0;
  e.residual = scale > 0.0 ? std::abs(general) / scale : 0.0;
  d.energy = e;
  d.energy_residual = e.residual;
  d.energy_residual_strict = e.residual_strict;
}

}  // namespace hybridns
