#include <doctest.h>

#include <cmath>

#include "hybridns/schemes.hpp"

using namespace hybridns;

namespace {

// Unit square, no-slip, optional force; the pressure gauge is left off so
// mean drift would be visible.
ProblemDef enclosed(std::size_t n, VectorField force = zero_vector_field(),
                    VectorField u0 = zero_vector_field()) {
  ProblemDef p;
  p.name = "enclosed";
  p.mesh.nx = p.mesh.ny = n;
  p.u0 = std::move(u0);
  p.p0 = zero_scalar_field();
  for (int tag = 1; tag <= 4; ++tag) p.dirichlet[tag] = zero_vector_field();
  p.force = std::move(force);
  p.pressure_mean_gauge = false;
  return p;
}

VectorField bubble() {
  return [](double x, double y, double) {
    const double b = x * (1 - x) * y * (1 - y);
    return Vec2{16 * b * (0.5 - y), 16 * b * (x - 0.3)};
  };
}

SchemeConfig config_for(Method m, double dt, double alpha2, double beta) {
  SchemeConfig c;
  c.method = m;
  c.dt = dt;
  c.alpha2 = alpha2;
  c.beta = beta;
  c.nu = 1.0;
  c.tol = 1e-12;
  return c;
}

double rel(std::span<const double> a, std::span<const double> b) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    num += (a[i] - b[i]) * (a[i] - b[i]);
    den += b[i] * b[i];
  }
  return den == 0.0 ? std::sqrt(num) : std::sqrt(num / den);
}

double max_abs(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

const Method kAll[] = {Method::hybrid_be_coupled,   Method::hybrid_be_decoupled_proj,
                       Method::hybrid_be_decoupled, Method::hybrid_be_filtered,
                       Method::hybrid_trapezoidal,  Method::pp_be,
                       Method::ac_be,               Method::pp_be_filtered,
                       Method::ac_be_filtered,      Method::pp_trapezoidal,
                       Method::ac_trapezoidal};

}  // namespace

TEST_CASE("method names round trip") {
  for (Method m : kAll) CHECK(method_from_string(to_string(m)) == m);
  CHECK_THROWS_AS(method_from_string("leapfrog"), std::invalid_argument);
}

TEST_CASE("scheme config validation") {
  SchemeConfig c;
  CHECK_NOTHROW(c.validate());
  c.mu = 1.0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = {};
  c.dt = 0.0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = {};
  c.beta = -1.0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
}

TEST_CASE("grad-div coefficients") {
  const double k = 0.1, a2 = 7.0, b = 3.0;
  auto coef = [&](Method m, double alpha2, double beta) {
    const SchemeConfig c = config_for(m, k, alpha2, beta);
    return is_trapezoidal(m) ? trapezoidal_coefficients(c) : be_coefficients(c);
  };
  const auto h = coef(Method::hybrid_be_decoupled, a2, b);
  CHECK(h.implicit_graddiv == doctest::Approx(k * a2 + 2 * b));
  CHECK(h.explicit_graddiv == doctest::Approx(2 * b));
  CHECK(h.keep_lambda);
  const auto ac = coef(Method::ac_be, a2, b);
  CHECK(ac.implicit_graddiv == doctest::Approx(k * a2));
  CHECK(ac.explicit_graddiv == 0.0);
  const auto pp = coef(Method::pp_be, a2, b);
  CHECK(pp.implicit_graddiv == doctest::Approx(2 * b));
  CHECK(!pp.keep_lambda);

  // Without the alpha term the hybrid velocity operator is the penalty one.
  CHECK(coef(Method::hybrid_be_decoupled, 0.0, b).implicit_graddiv == pp.implicit_graddiv);
  // Without beta it is the artificial compression one.
  const auto h0 = coef(Method::hybrid_be_decoupled, a2, 0.0);
  CHECK(h0.implicit_graddiv == ac.implicit_graddiv);
  CHECK(h0.explicit_graddiv == ac.explicit_graddiv);
  CHECK(h0.pressure_implicit == ac.pressure_implicit);

  const auto t = coef(Method::hybrid_trapezoidal, a2, b);
  CHECK(t.implicit_graddiv == doctest::Approx(k * a2 / 4 + b));
  CHECK(t.explicit_graddiv == doctest::Approx(b - k * a2 / 4));
  CHECK(t.pressure_implicit == doctest::Approx(k * a2 / 2 + 2 * b));
  CHECK(t.pressure_explicit == doctest::Approx(2 * b - k * a2 / 2));

  CHECK(modified_pressure_beta(config_for(Method::hybrid_trapezoidal, k, a2, b)) == b);
  CHECK(modified_pressure_beta(config_for(Method::pp_be, k, a2, b)) == b);
  CHECK(modified_pressure_beta(config_for(Method::ac_be_filtered, k, a2, b)) == 0.0);
}

TEST_CASE("time filter") {
  Vector next{2.0, 2.0, 0.0};
  apply_time_filter(Vector{2.0, 0.0, 0.0}, Vector{2.0, 1.0, 1.0}, next, 0.1);
  CHECK(next[0] == 2.0);                          // constant
  CHECK(next[1] == doctest::Approx(2.0));         // linear 0, 1, 2
  CHECK(next[2] == doctest::Approx(0.1));         // spike 0, 1, 0
}

TEST_CASE("zero state is a fixed point of every method") {
  const ProblemDef p = enclosed(4);
  Discretization d(build_mesh(p.mesh, ""), p);
  for (Method m : kAll) {
    CAPTURE(to_string(m));
    const Stepper s(d, config_for(m, 0.1, 10.0, 10.0));
    State st = initial_state(d, p, 1.0);
    for (int i = 0; i < 3; ++i) s.step(st);
    CHECK(max_abs(st.w) == 0.0);
    CHECK(max_abs(st.lambda) == 0.0);
  }
}

TEST_CASE("coupled and projected steps agree") {
  const ProblemDef p = taylor_green_problem(1.0, 8);
  Discretization d(build_mesh(p.mesh, ""), p);
  State a = initial_state(d, p, 1.0);
  State b = a;
  Stepper(d, config_for(Method::hybrid_be_coupled, 0.1, 10.0, 10.0)).step(a);
  Stepper(d, config_for(Method::hybrid_be_decoupled_proj, 0.1, 10.0, 10.0)).step(b);
  CHECK(rel(b.w, a.w) < 1e-8);
  CHECK(rel(b.lambda, a.lambda) < 1e-8);
}

TEST_CASE("projected step preserves the pressure mean") {
  const ProblemDef p = enclosed(6, [](double x, double y, double) { return Vec2{y, -x * x}; }, bubble());
  Discretization d(build_mesh(p.mesh, ""), p);
  State s = initial_state(d, p, 1.0);
  for (auto& l : s.lambda) l += 0.75;
  const double before = d.pressure_mean(s.lambda);
  Stepper(d, config_for(Method::hybrid_be_decoupled_proj, 0.1, 10.0, 10.0)).step(s);
  CHECK(std::abs(d.pressure_mean(s.lambda) - before) < 1e-12);
  CHECK(before == doctest::Approx(0.75));
}

TEST_CASE("alternate decoupled form is close to the projected one but not equal") {
  const ProblemDef p = taylor_green_problem(1.0, 16);
  Discretization d(build_mesh(p.mesh, ""), p);
  State a = initial_state(d, p, 1.0);
  State b = a;
  Stepper(d, config_for(Method::hybrid_be_decoupled, 0.1, 10.0, 10.0)).step(a);
  Stepper(d, config_for(Method::hybrid_be_decoupled_proj, 0.1, 10.0, 10.0)).step(b);
  const double diff = rel(a.w, b.w);
  CHECK(diff > 0.0);
  CHECK(diff < 1e-2);
}

TEST_CASE("penalty pressure is the scaled projected divergence") {
  const ProblemDef p = taylor_green_problem(1.0, 8);
  Discretization d(build_mesh(p.mesh, ""), p);
  State s = initial_state(d, p, 1.0);
  const double beta = 10.0;
  Stepper(d, config_for(Method::pp_be, 0.1, 10.0, beta)).step(s);
  const Vector Mpl = d.Mp() * s.lambda;
  const Vector Bw = d.B() * s.w;
  Vector target(Bw.size());
  for (std::size_t i = 0; i < Bw.size(); ++i) target[i] = -2 * beta * Bw[i];
  // The gauge shifts lambda by a constant; compare after removing it.
  Vector shifted = target;
  const Vector c = d.solve_pressure_mass(target);
  const double mean = d.pressure_mean(c);
  const Vector ones_m = d.Mp() * Vector(d.n_pressure(), mean);
  for (std::size_t i = 0; i < shifted.size(); ++i) shifted[i] -= ones_m[i];
  CHECK(rel(Mpl, shifted) < 1e-9);

  double prev = 1e300;
  for (double b : {1.0, 10.0, 100.0, 1000.0}) {
    State t = initial_state(d, p, 1.0);
    SchemeConfig c = config_for(Method::pp_be, 0.1, 10.0, b);
    c.tol = 1e-10;
    Stepper(d, c).step(t);
    const double dn = div_norm(d.dofmap(), t.w);
    CHECK(dn < prev);
    prev = dn;
  }
}

TEST_CASE("hybrid with beta zero is artificial compression bitwise") {
  const ProblemDef p = taylor_green_problem(1.0, 8);
  Discretization d(build_mesh(p.mesh, ""), p);
  State a = initial_state(d, p, 1.0);
  State b = a;
  const Stepper h(d, config_for(Method::hybrid_be_decoupled, 0.1, 10.0, 0.0));
  const Stepper ac(d, config_for(Method::ac_be, 0.1, 10.0, 0.0));
  for (int i = 0; i < 3; ++i) {
    h.step(a);
    ac.step(b);
  }
  CHECK(a.w == b.w);
  CHECK(a.lambda == b.lambda);
}

TEST_CASE("artificial compression pressure stays bounded") {
  const ProblemDef p = taylor_green_problem(1.0, 8);
  Discretization d(build_mesh(p.mesh, ""), p);
  const auto series = run_simulation(d, p, config_for(Method::ac_be, 0.1, 10.0, 10.0), 10.0);
  CHECK(series.size() == 101);
  for (const auto& r : series) {
    CHECK(std::isfinite(r.norm_lambda));
    CHECK(r.norm_lambda < 10.0);
  }
}

TEST_CASE("coupled scheme energy identity and stability bound") {
  const ProblemDef p = enclosed(6, [](double x, double y, double t) {
    return Vec2{std::sin(3 * y + t), x * x - 0.3};
  }, bubble());
  Discretization d(build_mesh(p.mesh, ""), p);
  for (double dt : {0.5, 0.1, 0.01}) {
    CAPTURE(dt);
    const SchemeConfig c = config_for(Method::hybrid_be_coupled, dt, 1.0 / dt, 1.0 / dt);
    const Stepper s(d, c);
    State st = initial_state(d, p, 1.0);
    auto energy = [&](const State& x) {
      Vector m = d.projected_divergence(x.w);
      for (std::size_t i = 0; i < m.size(); ++i) m[i] = x.lambda[i] + 2 * c.beta * m[i];
      const double lw = l2_norm(x.w, d.M()), lm = l2_norm(m, d.Mp());
      return lw * lw + lm * lm / c.alpha2;
    };
    double bound = energy(st);
    const int steps = dt == 0.01 ? 20 : 6;
    for (int n = 1; n <= steps; ++n) {
      const StepDiagnostics diag = s.step(st);
      CHECK(diag.energy_residual <= 1e-8);
      const Vector f = interpolate_velocity(d.dofmap(), p.force, n * dt);
      const double fn = l2_norm(f, d.M());
      bound += dt / c.nu * fn * fn;
      CHECK(energy(st) <= bound);
    }
  }
}

TEST_CASE("trapezoidal bootstrap uses the current level") {
  const ProblemDef p = taylor_green_problem(1.0, 6);
  Discretization d(build_mesh(p.mesh, ""), p);
  const Stepper s(d, config_for(Method::hybrid_trapezoidal, 0.1, 100.0, 100.0));
  State a = initial_state(d, p, 1.0);
  State b = a;
  b.w_prev = b.w;
  b.lambda_prev = b.lambda;
  b.has_prev = true;
  s.step(a);
  s.step(b);
  CHECK(a.w == b.w);
  CHECK(a.has_prev);
}

TEST_CASE("trapezoidal self-convergence is second order") {
  const ProblemDef p = manufactured_problem(8);
  Discretization d(build_mesh(p.mesh, ""), p);
  const double T = 0.4;
  std::vector<Vector> finals;
  for (double dt : {0.05, 0.025, 0.0125, 0.00625}) {
    SchemeConfig c = config_for(Method::hybrid_trapezoidal, dt, 1 / (dt * dt), 1 / (dt * dt));
    c.tol = 1e-10;
    State s = initial_state(d, p, 1.0);
    run_from(d, c, s, T, [&](const State& x, const TimeSeriesRecord&) {
      if (std::abs(x.t - T) < 1e-12) finals.push_back(x.w);
    });
  }
  REQUIRE(finals.size() == 4);
  std::vector<double> diffs;
  for (std::size_t i = 0; i + 1 < finals.size(); ++i) {
    Vector e(finals[i].size());
    for (std::size_t j = 0; j < e.size(); ++j) e[j] = finals[i][j] - finals[i + 1][j];
    diffs.push_back(l2_norm(e, d.M()));
  }
  const double rate = std::log2(diffs[1] / diffs[2]);
  MESSAGE("trapezoidal self-convergence differences " << diffs[0] << " " << diffs[1] << " "
                                                     << diffs[2] << ", rate " << rate);
  CHECK(std::abs(rate - 2.0) <= 0.3);
}

TEST_CASE("steady Stokes") {
  const ProblemDef z = enclosed(4);
  Discretization dz(build_mesh(z.mesh, ""), z);
  const State s0 = solve_steady_stokes(dz, 1.0);
  CHECK(max_abs(s0.w) == 0.0);
  CHECK(max_abs(s0.lambda) == 0.0);

  const ProblemDef p = offset_circles_problem("offset_circles_coarse.msh");
  Discretization d(build_mesh(p.mesh, default_asset_dir()), p);
  SolverReport report;
  const State s = solve_steady_stokes(d, 1.0 / p.Re, {1e-12}, &report);
  CHECK(report.converged);
  CHECK(l2_norm(d.projected_divergence(s.w), d.Mp()) <= 1e-8);
  CHECK(l2_norm(s.w, d.M()) > 1.0);
  CHECK(std::abs(div_integral(d.dofmap(), s.w)) < 1e-12);
  // Counterclockwise: positive angular momentum about the origin.
  double L = 0.0;
  for (std::size_t i = 0; i < d.dofmap().n_velocity_scalar(); ++i) {
    const Point2& q = d.dofmap().node(i);
    L += q.x * s.w[d.dofmap().velocity_dof(1, i)] - q.y * s.w[d.dofmap().velocity_dof(0, i)];
  }
  CHECK(L > 0.0);
}

TEST_CASE("run simulation bookkeeping") {
  const ProblemDef p = taylor_green_problem(1.0, 6);
  Discretization d(build_mesh(p.mesh, ""), p);
  const SchemeConfig c = config_for(Method::hybrid_be_decoupled, 0.1, 10.0, 10.0);
  CHECK(run_simulation(d, p, c, 0.0).size() == 1);
  const auto a = run_simulation(d, p, c, 1.0);
  const auto b = run_simulation(d, p, c, 1.0);
  REQUIRE(a.size() == 11);
  CHECK(!a[1].kappa);
  CHECK(a[2].kappa);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].norm_w == b[i].norm_w);
    CHECK(a[i].norm_div_w == b[i].norm_div_w);
    CHECK(a[i].norm_lambda == b[i].norm_lambda);
  }
  CHECK_THROWS_AS(run_simulation(d, p, c, 0.25), std::invalid_argument);

  SchemeConfig starved = c;
  starved.max_iter = 1;
  starved.tol = 1e-15;
  try {
    run_simulation(d, p, starved, 1.0);
    FAIL("expected a failure");
  } catch (const SimulationFailure& e) {
    CHECK(e.step() == 1);
    CHECK(e.partial().size() == 1);
  }
}
