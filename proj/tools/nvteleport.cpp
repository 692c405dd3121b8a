// Command-line front end: load a configuration, apply flag overrides,
// dispatch the experiment and write the report files.
//
// Exit codes: 0 success, 2 configuration error, 3 runtime error.

#include "nvtel/config.hpp"
#include "nvtel/runner.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

int main(int argc, char** argv) {
  CLI::App app{
      "nvteleport - density-matrix simulator of a two-node spin-qubit "
      "teleportation protocol"};

  std::string config_path;
  std::optional<std::string> experiment, mode, out_dir;
  std::optional<std::int64_t> shots;
  std::optional<std::uint64_t> seed;
  std::optional<int> workers;
  bool print_config = false;

  app.add_option("--config", config_path, "configuration file (key = value)")
      ->check(CLI::ExistingFile);
  app.add_option("--experiment", experiment,
                 "teleport | bsm-benchmark | calibrate | nuclear-flips | "
                 "tomography | link-rate");
  app.add_option("--mode", mode, "analytic | monte_carlo");
  app.add_option("--shots", shots, "Monte Carlo shots per input state");
  app.add_option("--seed", seed, "master seed for all sampling");
  app.add_option("--workers", workers, "worker threads for ensemble runs");
  app.add_option("--out-dir", out_dir, "output directory for reports");
  app.add_flag("--print-config", print_config,
               "print the resolved configuration and exit");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    nvtel::RunConfig config;
    if (!config_path.empty()) config = nvtel::load_config(config_path);
    nvtel::ConfigOverrides overrides;
    overrides.experiment = experiment;
    overrides.mode = mode;
    overrides.shots = shots;
    overrides.seed = seed;
    overrides.workers = workers;
    overrides.out_dir = out_dir;
    nvtel::apply_overrides(config, overrides);

    if (print_config) {
      std::cout << nvtel::save_config(config);
      return 0;
    }
    nvtel::run(config);
    std::cout << "wrote " << config.out_dir << "/report.json\n";
    return 0;
  } catch (const nvtel::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
