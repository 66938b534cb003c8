// Batch experiment runner: reads a key = value config (or starts from the
// built-in defaults), applies command line overrides, and writes the
// kind-specific CSV plus manifest.json.  Exit codes: 0 success, 2 config
// error, 3 numerical failure.
#include <cstdint>
#include <exception>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "ddisac/experiments.hpp"
#include "ddisac/solver.hpp"

int main(int argc, char** argv) {
  CLI::App app{"delay-Doppler joint communication and sensing precoder experiments"};
  app.footer("Config keys and CSV schemas are documented in README.md.");

  std::string config_path;
  std::string experiment;
  std::string output;
  std::uint64_t seed = 0;
  int realizations = 0;
  bool quiet = false;

  app.add_option("--config", config_path, "key = value config file; defaults when omitted")
      ->check(CLI::ExistingFile);
  app.add_option("--experiment", experiment,
                 "experiment kind: convergence | ber-vs-power | diag-elements | ber-vs-crb | "
                 "symbol-sweep | capacity-sweep");
  app.add_option("--seed", seed, "base RNG seed");
  app.add_option("--output", output, "output directory");
  app.add_option("--realizations", realizations, "channel realizations per sweep point")
      ->check(CLI::PositiveNumber);
  app.add_flag("--quiet", quiet, "suppress progress output");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    ddisac::ExperimentSpec spec;
    if (!config_path.empty()) spec = ddisac::parse_config_file(config_path);
    if (app.count("--experiment")) spec.kind = ddisac::experiment_kind_from_string(experiment);
    if (app.count("--seed")) spec.seed = seed;
    if (app.count("--output")) spec.output_dir = output;
    if (app.count("--realizations")) spec.realizations = realizations;
    ddisac::validate_spec(spec);
    ddisac::run_experiment(spec, quiet);
    return 0;
  } catch (const ddisac::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const ddisac::NonConvergenceError& e) {
    const auto& s = e.last_state;
    std::cerr << "numerical failure: " << e.what() << '\n'
              << "last ellipsoid center: lambda=" << s.center(0) << " mu=" << s.center(1) << '\n'
              << "last shape inverse: [[" << s.shape_inverse(0, 0) << ", "
              << s.shape_inverse(0, 1) << "], [" << s.shape_inverse(1, 0) << ", "
              << s.shape_inverse(1, 1) << "]]\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return 3;
  }
}
