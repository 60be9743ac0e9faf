#include <cmath>
#include <deque>
#include <filesystem>
#include <functional>
#include <iomanip>
#include <limits>
#include <memory>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "hybridns/cli.hpp"

namespace hybridns {

namespace {

struct Defaults {
  const char* problem;
  double T;
  double dt;
};

constexpr Defaults kRun{"taylor_green", 1.0, 0.1};
constexpr Defaults kConvergence{"manufactured", 1.0, 0.1};
constexpr Defaults kDamping{"offset_circles", 5.0, 0.01};
constexpr Defaults kEigen{"taylor_green", 0.0, 0.1};
constexpr Defaults kStability{"taylor_green", 10.0, 0.1};

// Maps exceptions onto the exit-code contract.
int guarded(std::ostream& err, const std::function<int()>& body) {
  try {
    return body();
  } catch (const SimulationFailure& e) {
    err << "error: solver failure at " << e.what() << "\n";
    return 3;
  } catch (const SolverFailure& e) {
    err << "error: solver failure: " << e.what() << "\n";
    return 3;
  } catch (const ConfigError& e) {
    err << "error: configuration: " << e.what() << "\n";
    return 2;
  } catch (const AssetError& e) {
    err << "error: asset: " << e.what() << "\n";
    return 2;
  } catch (const MeshParseError& e) {
    err << "error: mesh: " << e.what() << "\n";
    return 2;
  } catch (const OutputError& e) {
    err << "error: output: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    err << "error: invalid input: " << e.what() << "\n";
    return 2;
  }
}

std::string asset_dir(const RunConfig& c) {
  return c.asset_dir.empty() ? default_asset_dir() : c.asset_dir;
}

std::filesystem::path prepare_output(const RunConfig& c) {
  std::error_code ec;
  std::filesystem::create_directories(c.output_dir, ec);
  if (ec) throw OutputError("cannot create " + c.output_dir + ": " + ec.message());
  return c.output_dir;
}

std::unique_ptr<Discretization> discretize(const RunConfig& c, const ProblemDef& p) {
  TriMesh mesh = build_mesh(p.mesh, asset_dir(c));
  validate_problem(p, mesh);
  return std::make_unique<Discretization>(std::move(mesh), p);
}

std::string snapshot_name(std::size_t step) {
  std::ostringstream s;
  s << "snapshot_" << std::setw(6) << std::setfill('0') << step << ".vtk";
  return s.str();
}

}  // namespace

double mean_present(const std::vector<std::optional<double>>& v) {
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& x : v) {
    if (x) {
      sum += *x;
      ++n;
    }
  }
  return n ? sum / static_cast<double>(n) : std::numeric_limits<double>::quiet_NaN();
}

std::vector<Method> damping_methods(DampingDiscretization d) {
  switch (d) {
    case DampingDiscretization::be:
      return {Method::hybrid_be_decoupled, Method::pp_be, Method::ac_be};
    case DampingDiscretization::be_filtered:
      return {Method::hybrid_be_filtered, Method::pp_be_filtered, Method::ac_be_filtered};
    case DampingDiscretization::trapezoidal:
      return {Method::hybrid_trapezoidal, Method::pp_trapezoidal, Method::ac_trapezoidal};
  }
  return {};
}

ConvergenceRow spacetime_errors(const Discretization& disc, const ProblemDef& problem,
                                const SchemeConfig& scheme, double T) {
  if (!problem.exact) throw ConfigError("problem " + problem.name + " has no exact solution");
  std::vector<double> eu, ep, ed;
  run_simulation(disc, problem, scheme, T, [&](const State& s, const TimeSeriesRecord& r) {
    eu.push_back(velocity_error_l2(disc.dofmap(), s.w, problem.exact->u, s.t));
    ep.push_back(pressure_error_l2(disc.dofmap(), s.lambda, problem.exact->p, s.t, true));
    ed.push_back(r.norm_div_w);
  });
  return {scheme.dt, spacetime_l2(eu, scheme.dt), spacetime_l2(ep, scheme.dt),
          spacetime_l2(ed, scheme.dt)};
}

DampingSeries damping_run(const Discretization& disc, const ProblemDef& problem,
                          const SchemeConfig& scheme, double T) {
  DampingSeries out;
  std::deque<std::pair<Vector, Vector>> levels;  // (w, lambda), oldest first
  run_simulation(disc, problem, scheme, T, [&](const State& s, const TimeSeriesRecord& r) {
    levels.emplace_back(s.w, s.lambda);
    if (levels.size() > 3) levels.pop_front();
    out.t.push_back(s.t);
    out.norm_div_w.push_back(r.norm_div_w);
    out.kappa.push_back(r.kappa);
    if (levels.size() == 3) {
      const auto& [w0, l0] = levels[0];
      const auto& [w1, l1] = levels[1];
      const auto& [w2, l2] = levels[2];
      out.kappa_direct.push_back(
          discrete_curvature_direct(disc.dofmap(), l0, l1, l2, w0, w1, w2, modified_pressure_beta(scheme)));
      out.kappa_pressure.push_back(discrete_curvature(l0, l1, l2, disc.Mp()));
    } else {
      out.kappa_direct.push_back(std::nullopt);
      out.kappa_pressure.push_back(std::nullopt);
    }
  });
  return out;
}

int cmd_run(const RunConfig& config, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const ProblemDef problem = problem_for(config, kRun.problem);
    const SchemeConfig scheme = scheme_for(config, problem, kRun.dt);
    const double T = config.T.value_or(kRun.T);
    const auto dir = prepare_output(config);
    const auto disc = discretize(config, problem);
    out << "run " << problem.name << " method=" << to_string(scheme.method)
        << " dt=" << scheme.dt << " T=" << T << " alpha2=" << scheme.alpha2
        << " beta=" << scheme.beta << " unknowns=" << disc->n_velocity() + disc->n_pressure()
        << "\n";
    std::size_t index = 0;
    auto observer = [&](const State& s, const TimeSeriesRecord&) {
      if (config.snapshots_every && index % config.snapshots_every == 0) {
        write_vtk_snapshot(disc->mesh(), disc->dofmap(), s.w, s.lambda,
                           (dir / snapshot_name(index)).string());
      }
      ++index;
    };
    std::vector<TimeSeriesRecord> series;
    try {
      series = run_simulation(*disc, problem, scheme, T, observer);
    } catch (const SimulationFailure& e) {
      write_csv(e.partial(), (dir / "timeseries.csv").string());
      throw;
    }
    write_csv(series, (dir / "timeseries.csv").string());
    const auto& last = series.back();
    out << "done: steps=" << series.size() - 1 << " |w|=" << last.norm_w
        << " |div w|=" << last.norm_div_w << " |lambda|=" << last.norm_lambda << "\n";
    return 0;
  });
}

int cmd_convergence(const RunConfig& config, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const ProblemDef problem = problem_for(config, kConvergence.problem);
    if (!problem.exact) throw ConfigError("convergence needs a problem with an exact solution");
    const double T = config.T.value_or(kConvergence.T);
    const auto dir = prepare_output(config);
    const auto disc = discretize(config, problem);
    std::vector<ConvergenceRow> rows;
    for (double dt : config.convergence_dts) {
      RunConfig c = config;
      c.dt = dt;
      const SchemeConfig scheme = scheme_for(c, problem);
      rows.push_back(spacetime_errors(*disc, problem, scheme, T));
      out << "dt=" << dt << " err_u=" << rows.back().err_u << " err_p=" << rows.back().err_p
          << " div=" << rows.back().div_norm << "\n";
    }
    std::vector<double> eu, ep, dts;
    for (const auto& r : rows) {
      eu.push_back(r.err_u);
      ep.push_back(r.err_p);
      dts.push_back(r.dt);
    }
    const auto ru = convergence_rates(eu, dts);
    const auto rp = convergence_rates(ep, dts);
    CsvTable table{{"dt", "err_u", "rate_u", "err_p", "rate_p", "div_norm"}, {}};
    for (std::size_t i = 0; i < rows.size(); ++i) {
      std::optional<double> a, b;
      if (i > 0) {
        a = ru[i - 1];
        b = rp[i - 1];
      }
      table.rows.push_back({rows[i].dt, rows[i].err_u, a, rows[i].err_p, b, rows[i].div_norm});
    }
    write_table(table, (dir / "convergence.csv").string());
    return 0;
  });
}

int cmd_damping(const RunConfig& config, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const ProblemDef problem = problem_for(config, kDamping.problem);
    const double T = config.T.value_or(kDamping.T);
    const auto dir = prepare_output(config);
    const auto disc = discretize(config, problem);
    for (Method m : damping_methods(config.damping)) {
      RunConfig c = config;
      c.scheme.method = m;
      const SchemeConfig scheme = scheme_for(c, problem, kDamping.dt);
      const DampingSeries s = damping_run(*disc, problem, scheme, T);
      CsvTable table{{"t", "kappa", "kappa_direct", "kappa_pressure", "norm_div_w"}, {}};
      double div_sum = 0.0;
      for (std::size_t i = 0; i < s.t.size(); ++i) {
        table.rows.push_back(
            {s.t[i], s.kappa[i], s.kappa_direct[i], s.kappa_pressure[i], s.norm_div_w[i]});
        div_sum += s.norm_div_w[i];
      }
      write_table(table, (dir / (std::string("damping_") + to_string(m) + ".csv")).string());
      out << to_string(m) << ": mean kappa=" << mean_present(s.kappa)
          << " mean |div w|=" << div_sum / static_cast<double>(s.t.size()) << "\n";
    }
    return 0;
  });
}

int cmd_eigen_check(const RunConfig& config, bool json, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const ProblemDef problem = problem_for(config, kEigen.problem);
    const SchemeConfig scheme = scheme_for(config, problem, kEigen.dt);
    const TriMesh mesh = build_mesh(problem.mesh, asset_dir(config));
    const DofMap dofmap(mesh);
    const EigenEstimate e = smallest_laplacian_eigenvalue(mesh, dofmap, config.eigen_bc);
    const double alpha = std::sqrt(scheme.alpha2);
    if (!(alpha > 0.0) || !(scheme.beta > 0.0)) {
      throw ConfigError("eigen-check needs positive alpha2 and beta");
    }
    const OverdampingCheck check = check_overdamping(alpha, scheme.beta, e.sigma_min);
    if (json) {
      nlohmann::json j{{"sigma_min", e.sigma_min},
                       {"alpha", alpha},
                       {"beta", scheme.beta},
                       {"alpha_over_beta", alpha / scheme.beta},
                       {"verdict", to_string(check.verdict)},
                       {"margin", check.margin},
                       {"iterations", e.iterations}};
      out << j.dump(2) << "\n";
    } else {
      out << std::setprecision(10) << "sigma_min  " << e.sigma_min << "\n"
          << "alpha/beta " << alpha / scheme.beta << "\n"
          << "verdict    " << to_string(check.verdict) << "\n"
          << "margin     " << check.margin << "\n";
    }
    return 0;
  });
}

int cmd_stability(const RunConfig& config, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const ProblemDef problem = problem_for(config, kStability.problem);
    const double T = config.T.value_or(kStability.T);
    const auto dir = prepare_output(config);
    const auto disc = discretize(config, problem);
    for (auto coupling : {ParameterCoupling::reciprocal_dt, ParameterCoupling::proportional_dt}) {
      RunConfig c = config;
      c.coupling = coupling;
      const SchemeConfig scheme = scheme_for(c, problem, kStability.dt);
      const auto series = run_simulation(*disc, problem, scheme, T);
      write_csv(series, (dir / (std::string("stability_") + to_string(coupling) + ".csv")).string());
      out << to_string(coupling) << ": final |w|=" << series.back().norm_w
          << " |div w|=" << series.back().norm_div_w << "\n";
    }
    return 0;
  });
}

}  // namespace hybridns
