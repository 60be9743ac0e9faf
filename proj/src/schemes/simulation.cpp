#include <cmath>
#include <deque>

#include "hybridns/schemes.hpp"

namespace hybridns {

TimeSeriesRecord record_for(const Discretization& disc, const State& s) {
  TimeSeriesRecord r;
  r.t = s.t;
  r.norm_w = l2_norm(s.w, disc.M());
  r.norm_grad_w = l2_norm(s.w, disc.A());
  r.norm_div_w = div_norm(disc.dofmap(), s.w);
  r.norm_lambda = l2_norm(s.lambda, disc.Mp());
  return r;
}

namespace {

std::size_t step_count(double T, double dt) {
  if (!(T >= 0.0)) throw std::invalid_argument("final time must be nonnegative");
  const double n = std::round(T / dt);
  if (std::abs(n * dt - T) > 1e-12 * std::max(1.0, T)) {
    throw std::invalid_argument("final time is not a multiple of dt");
  }
  return static_cast<std::size_t>(n);
}

bool finite(const TimeSeriesRecord& r) {
  return std::isfinite(r.norm_w) && std::isfinite(r.norm_grad_w) && std::isfinite(r.norm_div_w) &&
         std::isfinite(r.norm_lambda);
}

}  // namespace

std::vector<TimeSeriesRecord> run_from(const Discretization& disc, const SchemeConfig& config,
                                       State state, double T, const StepObserver& observer) {
  const Stepper stepper(disc, config);
  const std::size_t steps = step_count(T, config.dt);
  const double t0 = state.t;

  // Modified pressure lambda + 2 beta Pi_Q div w for the curvature.
  std::deque<Vector> modified;
  const double beta = modified_pressure_beta(config);
  auto push_modified = [&](const State& s) {
    Vector m = disc.projected_divergence(s.w);
    for (std::size_t i = 0; i < m.size(); ++i) m[i] = s.lambda[i] + 2.0 * beta * m[i];
    modified.push_back(std::move(m));
    if (modified.size() > 3) modified.pop_front();
  };

  std::vector<TimeSeriesRecord> series;
  series.push_back(record_for(disc, state));
  push_modified(state);
  if (observer) observer(state, series.back());

  for (std::size_t n = 1; n <= steps; ++n) {
    StepDiagnostics d;
    try {
      d = stepper.step(state);
    } catch (const SolverFailure& e) {
      throw SimulationFailure("step " + std::to_string(n) + ": " + e.what(), n, series);
    }
    state.t = t0 + static_cast<double>(n) * config.dt;
    TimeSeriesRecord r = record_for(disc, state);
    r.solver_iterations = d.iterations;
    if (std::isfinite(d.energy_residual)) r.energy_residual = d.energy_residual;
    if (!finite(r)) {
      throw SimulationFailure("step " + std::to_string(n) + ": non-finite solution", n, series);
    }
    push_modified(state);
    if (modified.size() == 3) {
      r.kappa = discrete_curvature(modified[0], modified[1], modified[2], disc.Mp());
    }
    series.push_back(r);
    if (observer) observer(state, r);
  }
  return series;
}

std::vector<TimeSeriesRecord> run_simulation(const Discretization& disc,
                                             const ProblemDef& problem,
                                             const SchemeConfig& config, double T,
                                             const StepObserver& observer) {
  config.validate();
  step_count(T, config.dt);
  State initial;
  try {
    initial = initial_state(disc, problem, config.nu);
  } catch (const SolverFailure& e) {
    throw SimulationFailure(std::string("initial state: ") + e.what(), 0, {});
  }
  return run_from(disc, config, std::move(initial), T, observer);
}

}  // namespace hybridns
