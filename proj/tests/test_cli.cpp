#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include <json.hpp>

#include "hybridns/cli.hpp"

using namespace hybridns;
namespace fs = std::filesystem;

namespace {

std::string fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "hybridns_cli_tests" / name;
  fs::remove_all(dir);
  return dir.string();
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::size_t data_rows(const fs::path& path) {
  std::ifstream in(path);
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) n += !line.empty();
  return n - 1;
}

}  // namespace

TEST_CASE("config defaults and overrides") {
  const RunConfig d = parse_run_config("");
  CHECK(d.problem.empty());
  CHECK(d.coupling == ParameterCoupling::method_default);
  CHECK(d.convergence_dts.size() == 5);

  const RunConfig c = parse_run_config(
      R"({"problem": {"name": "manufactured", "Re": 2}, "scheme": {"method": "pp_be", "dt": 0.05},
          "mesh": {"nx": 4, "ny": 4}, "T": 0.5, "parameter_coupling": "reciprocal_dt2"})",
      {"scheme.mu=0.2", "output_dir=out/x", "damping.discretization=trapezoidal"});
  CHECK(c.problem == "manufactured");
  CHECK(*c.Re == 2.0);
  CHECK(c.scheme.method == Method::pp_be);
  CHECK(*c.dt == 0.05);
  CHECK(c.scheme.mu == 0.2);
  CHECK(c.output_dir == "out/x");
  CHECK(c.damping == DampingDiscretization::trapezoidal);
  CHECK(c.mesh->nx == 4);

  const ProblemDef p = problem_for(c);
  CHECK(p.name == "manufactured");
  CHECK(p.Re == 2.0);
  const SchemeConfig s = scheme_for(c, p);
  CHECK(s.nu == 0.5);
  CHECK(s.dt == 0.05);
  CHECK(s.alpha2 == doctest::Approx(400.0));
  CHECK(s.beta == doctest::Approx(400.0));
}

TEST_CASE("config rejects bad input") {
  CHECK_THROWS_AS(parse_run_config("{bad"), ConfigError);
  CHECK_THROWS_AS(parse_run_config("[1, 2]"), ConfigError);
  CHECK_THROWS_AS(parse_run_config(R"({"scheme": {"dtt": 0.1}})"), ConfigError);
  CHECK_THROWS_AS(parse_run_config(R"({"T": "long"})"), ConfigError);
  CHECK_THROWS_AS(parse_run_config(R"({"problem": {"name": "cavity"}})"), ConfigError);
  CHECK_THROWS_AS(parse_run_config(R"({"scheme": {"method": "leapfrog"}})"), ConfigError);
  CHECK_THROWS_AS(parse_run_config(R"({"scheme": {"mu": 1.5}})"), ConfigError);
  CHECK_THROWS_AS(parse_run_config(R"({"mesh": {"kind": "asset"}})"), ConfigError);
  CHECK_THROWS_AS(parse_run_config("", {"nonsense"}), ConfigError);
  CHECK_THROWS_AS(parse_run_config("", {"extra.key=1"}), ConfigError);
  CHECK_THROWS_AS(load_run_config("/nonexistent/config.json"), ConfigError);
}

TEST_CASE("parameter couplings") {
  SchemeConfig s;
  s.dt = 0.1;
  apply_coupling(ParameterCoupling::reciprocal_dt, s);
  CHECK(s.alpha2 == doctest::Approx(10.0));
  apply_coupling(ParameterCoupling::proportional_dt, s);
  CHECK(s.beta == doctest::Approx(0.1));
  s.method = Method::hybrid_trapezoidal;
  apply_coupling(ParameterCoupling::method_default, s);
  CHECK(s.alpha2 == doctest::Approx(100.0));
  s.alpha2 = 3.0;
  apply_coupling(ParameterCoupling::explicit_values, s);
  CHECK(s.alpha2 == 3.0);
  CHECK_THROWS_AS(coupling_from_string("sqrt_dt"), ConfigError);
}

TEST_CASE("run writes one row per step plus the initial state") {
  const std::string dir = fresh_dir("run");
  const RunConfig c = parse_run_config("", {"output_dir=" + dir, "mesh.nx=6", "mesh.ny=6",
                                            "T=0.5", "snapshots_every=2"});
  std::ostringstream out, err;
  CHECK(cmd_run(c, out, err) == 0);
  CHECK(data_rows(fs::path(dir) / "timeseries.csv") == 6);
  CHECK(fs::exists(fs::path(dir) / "snapshot_000000.vtk"));
  CHECK(fs::exists(fs::path(dir) / "snapshot_000004.vtk"));
  CHECK(!fs::exists(fs::path(dir) / "snapshot_000005.vtk"));
  CHECK(read_csv((fs::path(dir) / "timeseries.csv").string()).size() == 6);
}

TEST_CASE("run reports solver failure with the step index") {
  const std::string dir = fresh_dir("fail");
  const RunConfig c = parse_run_config(
      "", {"output_dir=" + dir, "mesh.nx=4", "mesh.ny=4", "scheme.dt=1000", "T=3000",
           "parameter_coupling=explicit", "scheme.alpha2=0", "scheme.beta=0", "scheme.max_iter=2",
           "scheme.tol=1e-14"});
  std::ostringstream out, err;
  CHECK(cmd_run(c, out, err) == 3);
  CHECK(err.str().find("step 1") != std::string::npos);
  CHECK(data_rows(fs::path(dir) / "timeseries.csv") == 1);
}

TEST_CASE("errors map to exit code 2") {
  std::ostringstream out, err;
  const RunConfig missing = parse_run_config(
      R"({"mesh": {"kind": "asset", "file": "missing.msh"}})", {"output_dir=" + fresh_dir("m")});
  CHECK(cmd_eigen_check(missing, false, out, err) == 2);
  CHECK(err.str().find("missing.msh") != std::string::npos);

  const RunConfig misaligned = parse_run_config(
      "", {"output_dir=" + fresh_dir("mis"), "mesh.kind=\"channel_step\"", "mesh.nx=30"});
  CHECK(cmd_run(misaligned, out, err) == 2);

  const RunConfig no_exact = parse_run_config(
      "", {"output_dir=" + fresh_dir("ne"), "problem.name=offset_circles"});
  CHECK(cmd_convergence(no_exact, out, err) == 2);

  const RunConfig bad_t = parse_run_config("", {"output_dir=" + fresh_dir("bt"), "T=0.25"});
  CHECK(cmd_run(bad_t, out, err) == 2);
}

TEST_CASE("eigen check verdicts") {
  std::ostringstream out, err;
  const RunConfig square = parse_run_config(
      "", {"mesh.nx=16", "mesh.ny=16", "scheme.dt=0.01", "parameter_coupling=reciprocal_dt"});
  CHECK(cmd_eigen_check(square, true, out, err) == 0);
  const auto j = nlohmann::json::parse(out.str());
  CHECK(j["verdict"] == "overdamped");
  CHECK(j["alpha_over_beta"].get<double>() == doctest::Approx(0.1));

  std::ostringstream out2;
  const RunConfig big = parse_run_config(
      R"({"mesh": {"x": [0, 10], "y": [0, 10], "nx": 10, "ny": 10}, "parameter_coupling": "explicit",
          "scheme": {"alpha2": 1, "beta": 1}})");
  CHECK(cmd_eigen_check(big, false, out2, err) == 0);
  CHECK(out2.str().find("not_overdamped") != std::string::npos);

  // Long channel: the lowest Neumann mode is close to (pi / 40)^2.
  std::ostringstream out3;
  const RunConfig channel = parse_run_config(
      R"({"problem": {"name": "channel_step"}, "mesh": {"kind": "channel_step"}})");
  REQUIRE(cmd_eigen_check(channel, true, out3, err) == 0);
  const double expected = std::pow(std::numbers::pi / 40.0, 2);
  const double sigma = nlohmann::json::parse(out3.str())["sigma_min"].get<double>();
  CHECK(std::abs(sigma - expected) / expected < 0.03);
}

TEST_CASE("convergence study output is complete and repeatable") {
  const std::string dir = fresh_dir("conv");
  const RunConfig c = parse_run_config(
      R"({"convergence": {"dts": [0.5, 0.25, 0.125, 0.0625, 0.03125]}})",
      {"output_dir=" + dir, "mesh.nx=4", "mesh.ny=4", "T=1"});
  std::ostringstream out, err;
  REQUIRE(cmd_convergence(c, out, err) == 0);
  const fs::path csv = fs::path(dir) / "convergence.csv";
  const std::string first = slurp(csv);
  CHECK(first.rfind("dt,err_u,rate_u,err_p,rate_p,div_norm\n", 0) == 0);
  CHECK(data_rows(csv) == 5);
  const CsvTable t = read_table(csv.string());
  CHECK(!column(t, "rate_u")[0]);
  CHECK(column(t, "rate_u")[1]);
  REQUIRE(cmd_convergence(c, out, err) == 0);
  CHECK(slurp(csv) == first);
}

TEST_CASE("damping study writes one file per method") {
  const std::string dir = fresh_dir("damp");
  const RunConfig c = parse_run_config(
      "", {"output_dir=" + dir, "problem.name=taylor_green", "mesh.nx=4", "mesh.ny=4", "T=0.4",
           "scheme.dt=0.1", "damping.discretization=be_filtered"});
  std::ostringstream out, err;
  REQUIRE(cmd_damping(c, out, err) == 0);
  for (const char* m : {"hybrid_be_filtered", "pp_be_filtered", "ac_be_filtered"}) {
    const fs::path csv = fs::path(dir) / (std::string("damping_") + m + ".csv");
    REQUIRE(fs::exists(csv));
    const CsvTable t = read_table(csv.string());
    CHECK(t.header == std::vector<std::string>{"t", "kappa", "kappa_direct", "kappa_pressure",
                                                "norm_div_w"});
    CHECK(t.rows.size() == 5);
    CHECK(!column(t, "kappa")[1]);
    CHECK(column(t, "kappa")[2]);
  }
  CHECK(damping_methods(DampingDiscretization::trapezoidal).front() == Method::hybrid_trapezoidal);
}

TEST_CASE("stability study writes paired files") {
  const std::string dir = fresh_dir("stab");
  const RunConfig c = parse_run_config("", {"output_dir=" + dir, "mesh.nx=4", "mesh.ny=4", "T=1"});
  std::ostringstream out, err;
  REQUIRE(cmd_stability(c, out, err) == 0);
  for (const char* name : {"stability_reciprocal_dt.csv", "stability_proportional_dt.csv"}) {
    const auto series = read_csv((fs::path(dir) / name).string());
    CHECK(series.size() == 11);
  }
}

TEST_CASE("mean of present values") {
  CHECK(mean_present({std::nullopt, 1.0, 3.0}) == 2.0);
  CHECK(std::isnan(mean_present({std::nullopt})));
}
