#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "hybridns/cli.hpp"

using namespace hybridns;

int main(int argc, char** argv) {
  CLI::App app{"Hybrid penalty / artificial compression Navier-Stokes solver"};
  app.require_subcommand(1);

  std::string config_path;
  std::vector<std::string> overrides;
  bool json = false;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("-c,--config", config_path, "JSON configuration file");
    sub->add_option("--set", overrides, "Override a key, e.g. scheme.dt=0.05")->take_all();
  };
  auto* run = app.add_subcommand("run", "Single simulation; writes timeseries.csv");
  auto* convergence = app.add_subcommand("convergence", "Temporal convergence study");
  auto* damping = app.add_subcommand("damping", "Pressure oscillation damping study");
  auto* eigen = app.add_subcommand("eigen-check", "Overdamping criterion check");
  auto* stability = app.add_subcommand("stability", "Parameter coupling stability study");
  for (auto* sub : {run, convergence, damping, eigen, stability}) add_common(sub);
  eigen->add_flag("--json", json, "Print the result as JSON");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  RunConfig config;
  try {
    config = load_run_config(config_path, overrides);
  } catch (const ConfigError& e) {
    std::cerr << "error: configuration: " << e.what() << "\n";
    return 2;
  }

  if (run->parsed()) return cmd_run(config, std::cout, std::cerr);
  if (convergence->parsed()) return cmd_convergence(config, std::cout, std::cerr);
  if (damping->parsed()) return cmd_damping(config, std::cout, std::cerr);
  if (eigen->parsed()) return cmd_eigen_check(config, json, std::cout, std::cerr);
  return cmd_stability(config, std::cout, std::cerr);
}
