#pragma once

#include <cstddef>
#include <functional>
#include <limits>
#include <memory>
#include <string>
#include <vector>

#include "hybridns/diagnostics.hpp"
#include "hybridns/fespace.hpp"
#include "hybridns/krylov.hpp"
#include "hybridns/problems.hpp"

namespace hybridns {

enum class Method {
  hybrid_be_coupled,
  hybrid_be_decoupled_proj,
  hybrid_be_decoupled,
  hybrid_be_filtered,
  hybrid_trapezoidal,
  pp_be,
  ac_be,
  pp_be_filtered,
  ac_be_filtered,
  pp_trapezoidal,
  ac_trapezoidal,
};

const char* to_string(Method m);
/// Throws std::invalid_argument for an unknown name.
Method method_from_string(const std::string& name);
bool is_trapezoidal(Method m);
bool is_filtered(Method m);

struct SchemeConfig {
  Method method = Method::hybrid_be_decoupled;
  double alpha2 = 10.0;
  double beta = 10.0;
  double nu = 1.0;
  double dt = 0.1;
  double mu = 0.1;
  double tol = 1e-10;
  std::size_t max_iter = 0;

  /// Throws std::invalid_argument unless nu, dt > 0, alpha2, beta >= 0 and
  /// 0 <= mu < 1. Zero alpha2 or beta is allowed so the limiting schemes can
  /// be formed.
  void validate() const;
};

/// beta of the modified pressure lambda + 2 beta Pi div w: zero for the AC
/// methods, which carry no grad-div term.
double modified_pressure_beta(const SchemeConfig& config);

/// Mesh, dof layout and every time-independent operator for one problem.
/// Holds references into itself; neither copyable nor movable.
class Discretization {
 public:
  Discretization(TriMesh mesh, const ProblemDef& problem);
  Discretization(const Discretization&) = delete;
  Discretization& operator=(const Discretization&) = delete;

  const TriMesh& mesh() const { return *mesh_; }
  const DofMap& dofmap() const { return dofmap_; }
  const TaylorHoodScatter& scatter() const { return scatter_; }
  std::size_t n_velocity() const { return dofmap_.n_velocity(); }
  std::size_t n_pressure() const { return dofmap_.n_pressure(); }

  const SparseMatrix& M() const { return M_; }
  const SparseMatrix& A() const { return A_; }
  const SparseMatrix& B() const { return B_; }
  const SparseMatrix& Bt() const { return Bt_; }
  const SparseMatrix& G() const { return G_; }
  const SparseMatrix& Mp() const { return Mp_; }

  /// Velocity dofs carrying Dirichlet data, ascending.
  const std::vector<std::size_t>& dirichlet_dofs() const { return dirichlet_dofs_; }
  /// Full-length velocity vector holding the boundary data at time t on the
  /// Dirichlet dofs and zero elsewhere.
  Vector dirichlet_values(double t) const;

  /// Pi_Q applied to the moments r: solves Mp c = r to inner tolerance.
  Vector solve_pressure_mass(std::span<const double> r) const;
  /// Pi_Q div w.
  Vector projected_divergence(std::span<const double> w) const;
  double pressure_mean(std::span<const double> lambda) const;
  void subtract_pressure_mean(std::span<double> lambda) const;
  double domain_area() const { return area_; }
  bool pressure_mean_gauge() const { return gauge_; }

  Vector load(double t) const { return assemble_load(dofmap_, force_, t); }

 private:
  std::unique_ptr<const TriMesh> mesh_;
  DofMap dofmap_;
  TaylorHoodScatter scatter_;
  SparseMatrix M_, A_, B_, Bt_, G_, Mp_;
  std::unique_ptr<SpdSolver> mp_solver_;
  Vector mass_ones_;
  double area_ = 0.0;
  std::vector<std::size_t> dirichlet_dofs_;
  std::vector<std::pair<int, std::vector<std::size_t>>> tag_nodes_;
  std::map<int, VectorField> dirichlet_;
  VectorField force_;
  bool gauge_ = true;
};

struct State {
  Vector w;
  Vector lambda;
  /// Previous level, used by the filter and the trapezoidal extrapolation.
  Vector w_prev;
  Vector lambda_prev;
  bool has_prev = false;
  double t = 0.0;
  std::size_t step = 0;
};

/// Terms of the discrete energy balance of the coupled scheme over one step.
struct EnergyTerms {
  double kinetic = 0.0;       // 1/2|w1|^2 - 1/2|w0|^2 + 1/2|w1-w0|^2
  double compression = 0.0;   // alpha^-2/2 (|L1|^2 - |L0|^2 + |L1-L0|^2)
  double penalty = 0.0;       // 2 beta k |Pi div w1|^2
  double viscous = 0.0;       // k nu |grad w1|^2
  double convection = 0.0;    // k w1^T N(w0) w1
  double forcing = 0.0;       // k (f, w1)
  double boundary_work = 0.0; // k w1 . (boundary rows of the momentum residual)
  double residual_strict = 0.0;
  double residual = 0.0;
};

struct StepDiagnostics {
  std::vector<SolverReport> reports;
  std::size_t iterations = 0;
  /// Only for the hybrid BE methods; NaN otherwise.
  double energy_residual = std::numeric_limits<double>::quiet_NaN();
  double energy_residual_strict = std::numeric_limits<double>::quiet_NaN();
  EnergyTerms energy;
};

/// Advances one step in place. Throws SolverFailure on solver failure.
class Stepper {
 public:
  Stepper(const Discretization& disc, SchemeConfig config);

  StepDiagnostics step(State& state) const;
  const SchemeConfig& config() const { return config_; }

 private:
  StepDiagnostics step_coupled(State& s) const;
  StepDiagnostics step_projected(State& s) const;
  StepDiagnostics step_decoupled(State& s) const;
  StepDiagnostics step_trapezoidal(State& s) const;
  void energy_balance(const State& before, const State& after, const SparseMatrix& N,
                      std::span<const double> force, StepDiagnostics& d) const;

  const Discretization& disc_;
  SchemeConfig config_;
  // Keeps a fallback factorization between steps.
  mutable NonsymmetricSolver solver_;
};

/// Coefficients shared by the decoupled velocity-pressure steps:
///   velocity:  [... + implicit_graddiv G] w1 = ... + explicit_graddiv G w0
///              (+ B^T lambda0 when keep_lambda)
///   pressure:  Mp lambda1 = keep_lambda Mp lambda0 - pressure_implicit B w1
///                           + pressure_explicit B w0
struct GradDivCoefficients {
  double implicit_graddiv = 0.0;
  double explicit_graddiv = 0.0;
  bool keep_lambda = true;
  double pressure_implicit = 0.0;
  double pressure_explicit = 0.0;
};

/// Backward Euler family (hybrid, pp, ac and their filtered variants).
GradDivCoefficients be_coefficients(const SchemeConfig& config);
/// Trapezoidal family, written for the unknown w1 (midpoint terms expanded).
GradDivCoefficients trapezoidal_coefficients(const SchemeConfig& config);

/// M/k + N + nu A + c G before any boundary rows are replaced.
SparseMatrix be_velocity_matrix(const Discretization& disc, const SparseMatrix& N, double nu,
                                double dt, double c_graddiv);

/// w <- w - mu/2 (w - 2 w_n + w_{n-1}) elementwise.
void apply_time_filter(std::span<const double> prev, std::span<const double> curr,
                       std::span<double> next, double mu);

struct StokesOptions {
  double tol = 1e-10;
  std::size_t max_iter = 0;
};

/// Steady Stokes: nu A u - B^T p = F(0), B u = 0, Dirichlet data at t = 0,
/// zero-mean pressure. Throws SolverFailure.
State solve_steady_stokes(const Discretization& disc, double nu, StokesOptions options = {},
                          SolverReport* report = nullptr);

/// Initial state from the problem: interpolated u0/p0 or the Stokes solution.
State initial_state(const Discretization& disc, const ProblemDef& problem, double nu);

/// Per-step observer: state after the step and its record.
using StepObserver = std::function<void(const State&, const TimeSeriesRecord&)>;

/// Raised when a step fails; carries the failing step index and the records
/// produced before it.
class SimulationFailure : public std::runtime_error {
 public:
  SimulationFailure(const std::string& what, std::size_t step,
                    std::vector<TimeSeriesRecord> partial)
      : std::runtime_error(what), step_(step), partial_(std::move(partial)) {}
  std::size_t step() const { return step_; }
  const std::vector<TimeSeriesRecord>& partial() const { return partial_; }

 private:
  std::size_t step_;
  std::vector<TimeSeriesRecord> partial_;
};

/// Records the state norms; kappa and energy_residual left empty.
TimeSeriesRecord record_for(const Discretization& disc, const State& s);

/// Runs from the initial state to T (a multiple of dt within 1e-12), emitting
/// one record for t = 0 and one per step.
std::vector<TimeSeriesRecord> run_simulation(const Discretization& disc,
                                             const ProblemDef& problem,
                                             const SchemeConfig& config, double T,
                                             const StepObserver& observer = {});

/// Same, starting from a given state.
std::vector<TimeSeriesRecord> run_from(const Discretization& disc, const SchemeConfig& config,
                                       State state, double T, const StepObserver& observer = {});

}  // namespace hybridns
