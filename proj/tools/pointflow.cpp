#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "pointflow/errors.hpp"
#include "pointflow/experiment.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Optimal control of steady Navier-Stokes flow by Dirac point forces"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::string> out_dir;
  std::optional<std::uint64_t> seed;
  bool verbose = false;

  auto* run = app.add_subcommand("run", "Run the experiment described by a JSON config");
  run->add_option("config", config_path, "Experiment configuration (JSON)")->required();
  run->add_option("--out", out_dir, "Output directory (overrides output.dir)");
  run->add_option("--seed", seed, "RNG seed (overrides seed)");
  run->add_flag("--verbose", verbose, "Log progress to stderr");

  CLI11_PARSE(app, argc, argv);

  pointflow::ExperimentConfig cfg;
  try {
    cfg = pointflow::load_config(config_path, {out_dir, seed});
  } catch (const pointflow::ConfigError& e) {
    std::cerr << "invalid config: " << e.what() << '\n';
    return 2;
  }

  try {
    const auto outcome = pointflow::run_experiment(cfg, verbose ? &std::cerr : nullptr);
    if (verbose) std::cerr << "wrote " << outcome.files.size() << " files to " << cfg.output_dir << '\n';
  } catch (const pointflow::ConfigError& e) {
    std::cerr << "invalid config: " << e.what() << '\n';
    return 2;
  } catch (const pointflow::NonConvergence& e) {
    std::cerr << "solver failure: " << e.what() << '\n';
    return 3;
  } catch (const pointflow::SingularSystem& e) {
    std::cerr << "solver failure: " << e.what() << " (rcond " << e.rcond() << ")\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
