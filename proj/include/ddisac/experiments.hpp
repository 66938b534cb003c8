#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "ddisac/otfs.hpp"
#include "ddisac/types.hpp"

namespace ddisac {

// Schema violation in a config file or spec field; the message names the
// offending key and, for file input, its line number.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class ExperimentKind {
  kConvergence,    // per-iteration dual trace of the precoder solver
  kBerVsPower,     // analytic + empirical BER across the power sweep
  kDiagElements,   // diagonal of the equalized-inverse Gram per scheme
  kBerVsCrb,       // BER as the sensing accuracy target tightens
  kSymbolSweep,    // bounds and rates versus the number of active symbols
  kCapacitySweep,  // achievable rate across the power sweep
};

std::string to_string(ExperimentKind kind);
ExperimentKind experiment_kind_from_string(const std::string& name);

/**
 * One batch experiment: grid geometry, channel statistics, sweep axes and
 * output location.  Powers and noise levels are dBm in the config and
 * converted to linear scale internally.  gamma_c entries are Doppler CRB
 * targets in normalized Doppler-tap units squared; the sensing trace floor
 * passed to the solver is sigma_s^2 / gamma_c.
 */
struct ExperimentSpec {
  ExperimentKind kind = ExperimentKind::kConvergence;
  int m = 8;
  int n = 8;
  double delta_f_hz = 2000.0;
  int mod_order = 4;
  int num_paths = 3;   // communication paths; gain variance 1 / num_paths each
  int l_max = 4;       // largest delay tap
  double k_max = 2.0;  // largest Doppler tap magnitude, fractional values drawn
  double sigma_c_dbm = 0.0;
  double sigma_s_dbm = 0.0;
  std::vector<double> power_dbm{20, 22, 24, 26, 28, 30};
  std::vector<double> gamma_c{5e-5};
  std::uint64_t seed = 1;
  int realizations = 20;
  int blocks = 200;  // Monte-Carlo frames per empirical point
  double xi0 = 1e-3;
  std::string output_dir = ".";

  bool operator==(const ExperimentSpec&) const = default;
};

// key = value text, one pair per line, '#' starts a comment; unknown keys
// and malformed values are rejected with their line number.  An empty file
// yields the default spec.
ExperimentSpec parse_config_text(const std::string& text);
ExperimentSpec parse_config_file(const std::string& path);

// Inverse of parse_config_text: the emitted text parses back to an
// identical spec (doubles carry 17 significant digits).
std::string emit_config(const ExperimentSpec& spec);

// Field-by-field sanity; throws ConfigError naming the field.
void validate_spec(const ExperimentSpec& spec);

double dbm_to_linear(double dbm);

// One random draw of the communication and sensing channels, a pure
// function of (spec.seed, realization).  The sensing target has unit gain;
// its Doppler derivative is taken against the normalized Doppler tap, so
// Fisher information and CRB come out in tap units.
struct ChannelDraw {
  DdChannel comm;
  DdChannel sensing;
  CMat h_dot;
};

ChannelDraw sample_channels(const ExperimentSpec& spec, std::uint64_t realization);

struct RunResult {
  std::vector<std::string> csv_files;
  std::string manifest_file;
};

// Runs the configured experiment, writing the kind-specific CSV plus
// manifest.json into spec.output_dir.  Every row carries (seed,
// realization) provenance and a status column; sweep points whose sensing
// target is unattainable are flagged infeasible and the run continues.
// Output bytes depend only on the spec.
RunResult run_experiment(const ExperimentSpec& spec, bool quiet = true);

}  // namespace ddisac
