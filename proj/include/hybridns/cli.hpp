#pragma once

#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "hybridns/eigen_estimate.hpp"
#include "hybridns/problems.hpp"
#include "hybridns/schemes.hpp"

namespace hybridns {

/// Malformed or inconsistent configuration. Commands map it to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// How alpha2 and beta follow from dt.
///   explicit_values  the configured scheme.alpha2 / scheme.beta
///   reciprocal_dt    1/dt
///   reciprocal_dt2   1/dt^2
///   proportional_dt  dt
///   method_default   1/dt for the BE family, 1/dt^2 for trapezoidal
enum class ParameterCoupling {
  explicit_values,
  reciprocal_dt,
  reciprocal_dt2,
  proportional_dt,
  method_default
};

const char* to_string(ParameterCoupling c);
/// Throws ConfigError for an unknown name.
ParameterCoupling coupling_from_string(const std::string& name);

/// Sets config.alpha2 and config.beta from config.dt.
void apply_coupling(ParameterCoupling coupling, SchemeConfig& config);

enum class DampingDiscretization { be, be_filtered, trapezoidal };

struct RunConfig {
  /// Empty: the command's default problem.
  std::string problem;
  std::optional<double> Re;
  bool bc_time_frozen = false;
  /// Empty: the problem's own mesh.
  std::optional<MeshSource> mesh;
  std::string asset_dir;  // empty: default_asset_dir()
  /// scheme.dt is ignored; the step comes from `dt` or the command default.
  SchemeConfig scheme;
  std::optional<double> dt;
  ParameterCoupling coupling = ParameterCoupling::method_default;
  std::optional<double> T;
  std::string output_dir = "output";
  std::size_t snapshots_every = 0;

  std::vector<double> convergence_dts{0.5, 0.25, 0.125, 0.0625, 0.03125};
  DampingDiscretization damping = DampingDiscretization::be;
  LaplacianBc eigen_bc = LaplacianBc::neumann_zero_mean;
};

/// Parses the JSON text, applies `key.path=value` overrides (value parsed as
/// JSON when possible, else taken as a string), then validates. Unknown keys
/// and out-of-range values throw ConfigError.
RunConfig parse_run_config(const std::string& json_text,
                           const std::vector<std::string>& overrides = {});
/// Same, reading the file (empty path: defaults only).
RunConfig load_run_config(const std::string& path,
                          const std::vector<std::string>& overrides = {});

/// Problem with the configured Re and mesh applied; `fallback` names the
/// problem when none is configured.
ProblemDef problem_for(const RunConfig& config, const std::string& fallback = "taylor_green");
/// Scheme parameters with nu = 1/Re, the step (configured, else
/// `default_dt`) and the coupling applied.
SchemeConfig scheme_for(const RunConfig& config, const ProblemDef& problem,
                        double default_dt = 0.1);

// Commands. Human log to `out`, errors to `err`; exit codes 0 success,
// 2 configuration or asset error, 3 solver failure.
int cmd_run(const RunConfig& config, std::ostream& out, std::ostream& err);
int cmd_convergence(const RunConfig& config, std::ostream& out, std::ostream& err);
int cmd_damping(const RunConfig& config, std::ostream& out, std::ostream& err);
int cmd_eigen_check(const RunConfig& config, bool json, std::ostream& out, std::ostream& err);
int cmd_stability(const RunConfig& config, std::ostream& out, std::ostream& err);

/// Methods compared by the damping study, hybrid first.
std::vector<Method> damping_methods(DampingDiscretization d);

struct ConvergenceRow {
  double dt = 0.0;
  double err_u = 0.0;
  double err_p = 0.0;
  double div_norm = 0.0;
};

/// Space-time errors of one run of an exact-solution problem: velocity,
/// mean-free pressure and the divergence norm, each by the trapezoidal rule.
ConvergenceRow spacetime_errors(const Discretization& disc, const ProblemDef& problem,
                                const SchemeConfig& scheme, double T);

struct DampingSeries {
  std::vector<double> t;
  std::vector<std::optional<double>> kappa;
  std::vector<std::optional<double>> kappa_direct;
  std::vector<std::optional<double>> kappa_pressure;
  std::vector<double> norm_div_w;
};

/// One damping run: curvatures of lambda + 2 beta Pi div w (projected and by
/// quadrature) and of lambda alone, plus ||div w||.
DampingSeries damping_run(const Discretization& disc, const ProblemDef& problem,
                          const SchemeConfig& scheme, double T);

/// Mean of the present entries; NaN when none.
double mean_present(const std::vector<std::optional<double>>& v);

}  // namespace hybridns
