// Acceptance checks 1-9. One PASS/FAIL line per criterion; exit status is
// nonzero when any criterion fails. Optional arguments select criteria.

#include <Eigen/Dense>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <set>
#include <sstream>
#include <string>

#include "hybridns/cli.hpp"
#include "hybridns/eigen_estimate.hpp"
#include "hybridns/schemes.hpp"

using namespace hybridns;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

SchemeConfig scheme(Method m, double dt, double alpha2, double beta, double nu, double tol = 1e-10) {
  SchemeConfig c;
  c.method = m;
  c.dt = dt;
  c.alpha2 = alpha2;
  c.beta = beta;
  c.nu = nu;
  c.tol = tol;
  return c;
}

double rel(std::span<const double> a, std::span<const double> b) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    num += (a[i] - b[i]) * (a[i] - b[i]);
    den += b[i] * b[i];
  }
  return den > 0.0 ? std::sqrt(num / den) : std::sqrt(num);
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

bool finite_series(const std::vector<TimeSeriesRecord>& s) {
  for (const auto& r : s) {
    if (!std::isfinite(r.norm_w) || !std::isfinite(r.norm_grad_w) || !std::isfinite(r.norm_div_w) ||
        !std::isfinite(r.norm_lambda)) {
      return false;
    }
  }
  return true;
}

// 1. Temporal convergence of the decoupled scheme on the manufactured solution.
Outcome convergence() {
  const ProblemDef p = manufactured_problem(32);
  Discretization d(build_mesh(p.mesh, ""), p);
  const std::vector<double> dts{0.5, 0.25, 0.125, 0.0625, 0.03125};
  std::vector<double> eu, ep, div;
  for (double dt : dts) {
    const ConvergenceRow r = spacetime_errors(
        d, p, scheme(Method::hybrid_be_decoupled, dt, 1 / dt, 1 / dt, 1.0 / p.Re), 1.0);
    eu.push_back(r.err_u);
    ep.push_back(r.err_p);
    div.push_back(r.div_norm);
  }
  const auto ru = convergence_rates(eu, dts);
  const auto rp = convergence_rates(ep, dts);
  bool ok = true;
  std::ostringstream s;
  s << "rate_u";
  for (double r : ru) {
    s << ' ' << fmt("%.2f", r);
    ok &= std::abs(r - 1.0) <= 0.25;
  }
  s << "; rate_p (dt<=0.25)";
  for (std::size_t i = 1; i < rp.size(); ++i) {
    s << ' ' << fmt("%.2f", rp[i]);
    ok &= std::abs(rp[i] - 1.0) <= 0.25;
  }
  s << "; div";
  for (double v : div) {
    s << ' ' << fmt("%.1e", v);
    ok &= v <= 1e-5;
  }
  return {ok, s.str()};
}

// 2. Discrete energy identity of the coupled scheme.
Outcome energy_identity() {
  double worst = 0.0, worst_strict = 0.0;
  {
    const ProblemDef p = taylor_green_problem(1.0, 8);
    Discretization d(build_mesh(p.mesh, ""), p);
    const Stepper st(d, scheme(Method::hybrid_be_coupled, 0.1, 10.0, 10.0, 1.0, 1e-12));
    State s = initial_state(d, p, 1.0);
    for (int n = 0; n < 20; ++n) worst = std::max(worst, st.step(s).energy_residual);
  }
  {
    // Same data with homogeneous no-slip boundary values.
    ProblemDef p = taylor_green_problem(1.0, 8);
    for (auto& [tag, g] : p.dirichlet) g = zero_vector_field();
    Discretization d(build_mesh(p.mesh, ""), p);
    const Stepper st(d, scheme(Method::hybrid_be_coupled, 0.1, 10.0, 10.0, 1.0, 1e-12));
    State s = initial_state(d, p, 1.0);
    for (int n = 0; n < 20; ++n) worst_strict = std::max(worst_strict, st.step(s).energy_residual_strict);
  }
  return {worst <= 1e-8 && worst_strict <= 1e-8,
          "max residual " + fmt("%.2e", worst) + " (with boundary work), " +
              fmt("%.2e", worst_strict) + " (no-slip)"};
}

// 3. Coupled and projected decoupled iterates coincide.
Outcome equivalence() {
  const ProblemDef p = taylor_green_problem(1.0, 16);
  Discretization d(build_mesh(p.mesh, ""), p);
  const Stepper a(d, scheme(Method::hybrid_be_coupled, 0.1, 10.0, 10.0, 1.0, 1e-12));
  const Stepper b(d, scheme(Method::hybrid_be_decoupled_proj, 0.1, 10.0, 10.0, 1.0, 1e-12));
  State sa = initial_state(d, p, 1.0), sb = sa;
  double worst = 0.0;
  for (int n = 0; n < 10; ++n) {
    a.step(sa);
    b.step(sb);
    Vector dw(sa.w.size()), dl(sa.lambda.size());
    for (std::size_t i = 0; i < dw.size(); ++i) dw[i] = sa.w[i] - sb.w[i];
    for (std::size_t i = 0; i < dl.size(); ++i) dl[i] = sa.lambda[i] - sb.lambda[i];
    worst = std::max(worst, l2_norm(dw, d.M()) / l2_norm(sa.w, d.M()));
    worst = std::max(worst, l2_norm(dl, d.Mp()) / l2_norm(sa.lambda, d.Mp()));
  }
  return {worst <= 1e-8, "max relative difference " + fmt("%.2e", worst)};
}

// 4. Skew-symmetry of the convection matrix on interior-supported fields.
Outcome skew_symmetry() {
  const TriMesh m = generate_rect_mesh({0, 1}, {0, 1}, 12, 12);
  const DofMap d(m);
  const auto boundary = boundary_dofs(m, d, {1, 2, 3, 4});
  std::mt19937 rng(2024);
  std::normal_distribution<double> N01;
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    Vector w(d.n_velocity()), v(d.n_velocity());
    for (auto& x : w) x = N01(rng);
    for (auto& x : v) x = N01(rng);
    for (auto i : boundary) v[i] = 0.0;
    const double q = quadratic_form(assemble_convection(d, w), v, v);
    worst = std::max(worst, std::abs(q) / (norm2(w) * dot(v, v)));
  }
  return {worst <= 1e-12, "max |v'N(w)v| / (|w||v|^2) " + fmt("%.2e", worst)};
}

// 5. Smallest Neumann eigenvalue and the overdamping verdicts.
Outcome overdamping() {
  const TriMesh m = generate_rect_mesh({0, 1}, {0, 1}, 32, 32);
  const double pi2 = std::numbers::pi * std::numbers::pi;
  const double sigma = smallest_laplacian_eigenvalue(m, DofMap(m), LaplacianBc::neumann_zero_mean).sigma_min;
  const double err = std::abs(sigma - pi2) / pi2;
  int agree = 0;
  const double alphas[] = {0.1, 1.0, 3.0, 10.0, 31.6};
  const double betas[] = {1.0, 10.0};
  for (double a : alphas) {
    for (double b : betas) {
      const bool hand = a / b < std::sqrt(sigma);
      agree += (check_overdamping(a, b, sigma).verdict == DampingVerdict::overdamped) == hand;
    }
  }
  return {err <= 0.03 && agree == 10,
          "sigma_min " + fmt("%.5f", sigma) + " (rel err " + fmt("%.2e", err) + "), verdicts " +
              std::to_string(agree) + "/10"};
}

// 6. Stability under the two parameter couplings.
Outcome stability() {
  const ProblemDef p = taylor_green_problem(1.0, 16);
  Discretization d(build_mesh(p.mesh, ""), p);
  double final_div[2];
  bool finite = true;
  int i = 0;
  for (auto coupling : {ParameterCoupling::reciprocal_dt, ParameterCoupling::proportional_dt}) {
    SchemeConfig c = scheme(Method::hybrid_be_decoupled, 0.1, 0, 0, 1.0);
    apply_coupling(coupling, c);
    const auto series = run_simulation(d, p, c, 10.0);
    finite &= finite_series(series);
    final_div[i++] = series.back().norm_div_w;
  }
  const double ratio = final_div[1] / final_div[0];
  return {finite && ratio >= 10.0, "terminal |div w| " + fmt("%.2e", final_div[0]) + " vs " +
                                       fmt("%.2e", final_div[1]) + ", ratio " + fmt("%.1f", ratio)};
}

struct DampingSummary {
  double mean_kappa;
  double mean_div;
};

DampingSummary damping_summary(const Discretization& d, const ProblemDef& p, Method m) {
  const double dt = 0.01;
  SchemeConfig c = scheme(m, dt, 0, 0, 1.0 / p.Re);
  apply_coupling(ParameterCoupling::method_default, c);
  const DampingSeries s = damping_run(d, p, c, 5.0);
  double div = 0.0;
  for (double v : s.norm_div_w) div += v;
  return {mean_present(s.kappa), div / static_cast<double>(s.norm_div_w.size())};
}

// 7. Damping trends on the coarse offset-circles mesh.
Outcome damping() {
  const ProblemDef p = offset_circles_problem("offset_circles_coarse.msh");
  Discretization d(build_mesh(p.mesh, default_asset_dir()), p);
  const auto hb = damping_summary(d, p, Method::hybrid_be_decoupled);
  const auto ab = damping_summary(d, p, Method::ac_be);
  const auto ht = damping_summary(d, p, Method::hybrid_trapezoidal);
  const auto at = damping_summary(d, p, Method::ac_trapezoidal);
  const auto pt = damping_summary(d, p, Method::pp_trapezoidal);
  const double be_ratio = hb.mean_kappa / ab.mean_kappa;
  const bool be_ok = be_ratio >= 0.1 && be_ratio <= 10.0;
  const bool ac_ok = ht.mean_div * 10.0 <= at.mean_div;
  const double pp_ratio = ht.mean_div / pt.mean_div;
  const bool pp_ok = pp_ratio >= 0.1 && pp_ratio <= 10.0;
  return {be_ok && ac_ok && pp_ok,
          "BE mean kappa hybrid " + fmt("%.3e", hb.mean_kappa) + " AC " + fmt("%.3e", ab.mean_kappa) +
              " (ratio " + fmt("%.3f", be_ratio) + "); trapezoidal div hybrid " +
              fmt("%.2e", ht.mean_div) + " AC " + fmt("%.2e", at.mean_div) + " PP " +
              fmt("%.2e", pt.mean_div)};
}

// 8. Channel flow develops an eddy behind the step.
Outcome channel() {
  const ProblemDef p = channel_step_problem();
  Discretization d(build_mesh(p.mesh, ""), p);
  const double dt = 0.02;
  const SchemeConfig c = scheme(Method::hybrid_trapezoidal, dt, 1 / (dt * dt), 1 / (dt * dt), 1.0 / p.Re);
  double indicator = 0.0;
  const auto series = run_simulation(d, p, c, 5.0, [&](const State& s, const TimeSeriesRecord&) {
    indicator = min_x_velocity(d.dofmap(), s.w, {6.0, 7.0}, 1.0);
  });
  double peak = 0.0;
  for (const auto& r : series) peak = std::max(peak, r.norm_w);
  const bool bounded = finite_series(series) && peak < 1e3;
  return {bounded && indicator < 0.0,
          "max |w| " + fmt("%.3f", peak) + ", min u_x behind step " + fmt("%.3e", indicator)};
}

Vector dense_solve(const SparseMatrix& A, std::span<const double> b) {
  Eigen::MatrixXd D = Eigen::MatrixXd::Zero(A.rows(), A.cols());
  for (std::size_t i = 0; i < A.rows(); ++i) {
    for (std::size_t q = A.row_offsets()[i]; q < A.row_offsets()[i + 1]; ++q) {
      D(i, A.col_indices()[q]) = A.values()[q];
    }
  }
  const Eigen::VectorXd x =
      D.fullPivLu().solve(Eigen::Map<const Eigen::VectorXd>(b.data(), b.size()));
  return Vector(x.data(), x.data() + x.size());
}

// 9. Formula reduction and dense oracle agreement for small solves.
Outcome oracles() {
  const ProblemDef p = taylor_green_problem(1.0, 4);
  Discretization d(build_mesh(p.mesh, ""), p);

  State a = initial_state(d, p, 1.0), b = a;
  const Stepper hybrid(d, scheme(Method::hybrid_be_decoupled, 0.1, 10.0, 0.0, 1.0));
  const Stepper ac(d, scheme(Method::ac_be, 0.1, 10.0, 0.0, 1.0));
  for (int n = 0; n < 5; ++n) {
    hybrid.step(a);
    ac.step(b);
  }
  const bool bitwise = a.w == b.w && a.lambda == b.lambda;

  // Systems of the kinds the steppers solve, all of dimension <= 200.
  const double tol = 1e-10;
  const State s0 = initial_state(d, p, 1.0);
  const SparseMatrix N = assemble_convection(d.dofmap(), s0.w);
  std::vector<std::pair<SparseMatrix, bool>> systems;  // (matrix, spd)
  for (double c : {0.0, 2.0, 21.0}) {
    SparseMatrix K = be_velocity_matrix(d, N, 1.0, 0.1, c);
    K.replace_rows_with_identity(d.dirichlet_dofs());
    systems.emplace_back(std::move(K), false);
  }
  SparseMatrix A = d.A();
  A.replace_rows_with_identity(d.dirichlet_dofs());
  systems.emplace_back(std::move(A), false);
  systems.emplace_back(d.Mp(), true);
  systems.emplace_back(d.M(), true);

  double worst = 0.0;
  std::size_t count = 0;
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  for (const auto& [K, spd] : systems) {
    if (K.rows() > 200) continue;
    Vector rhs(K.rows());
    for (auto& x : rhs) x = U(rng);
    const Vector x = spd ? solve_spd(K, rhs, tol).x : solve_nonsymmetric(K, rhs, tol).x;
    worst = std::max(worst, rel(x, dense_solve(K, rhs)));
    ++count;
  }
  return {bitwise && count >= 5 && worst <= 10 * tol,
          std::string("beta=0 reduction ") + (bitwise ? "bitwise" : "differs") + "; " +
              std::to_string(count) + " solves, max relative deviation " + fmt("%.2e", worst)};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"temporal convergence", convergence},   {"energy identity", energy_identity},
      {"coupled/projected equivalence", equivalence}, {"convection skew-symmetry", skew_symmetry},
      {"overdamping criterion", overdamping}, {"stability study", stability},
      {"damping study", damping},             {"channel recirculation", channel},
      {"oracle equivalences", oracles}};
  std::set<int> selected;
  for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));

  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!selected.empty() && !selected.count(id)) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("criterion %d %s: %s [%.1fs] %s\n", id, criteria[i].first, o.pass ? "PASS" : "FAIL",
                sec, o.detail.c_str());
    std::fflush(stdout);
    failures += !o.pass;
  }
  return failures ? 1 : 0;
}
