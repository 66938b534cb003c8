#include "ddisac/experiments.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string_view>

#include <json.hpp>

#include "ddisac/metrics.hpp"
#include "ddisac/montecarlo.hpp"
#include "ddisac/qam.hpp"
#include "ddisac/rng.hpp"
#include "ddisac/solver.hpp"

namespace ddisac {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

bool parse_double(std::string_view v, double& out) {
  const char* last = v.data() + v.size();
  const auto [p, ec] = std::from_chars(v.data(), last, out);
  return ec == std::errc() && p == last && std::isfinite(out);
}

bool parse_int(std::string_view v, int& out) {
  const char* last = v.data() + v.size();
  const auto [p, ec] = std::from_chars(v.data(), last, out);
  return ec == std::errc() && p == last;
}

bool parse_u64(std::string_view v, std::uint64_t& out) {
  const char* last = v.data() + v.size();
  const auto [p, ec] = std::from_chars(v.data(), last, out);
  return ec == std::errc() && p == last;
}

bool parse_double_list(std::string_view v, std::vector<double>& out) {
  out.clear();
  while (true) {
    const auto comma = v.find(',');
    const std::string_view item = trim(v.substr(0, comma));
    double value;
    if (item.empty() || !parse_double(item, value)) return false;
    out.push_back(value);
    if (comma == std::string_view::npos) return true;
    v.remove_prefix(comma + 1);
  }
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string join(const std::vector<double>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ", ";
    out += fmt(values[i]);
  }
  return out;
}

// RFC-4180: quote a field only when it contains a separator, quote or line
// break; embedded quotes are doubled.
std::string csv_escape(const std::string& field) {
  if (field.find_first_of(",\"\r\n") == std::string::npos) return field;
  std::string quoted = "\"";
  for (const char ch : field) {
    if (ch == '"') quoted += '"';
    quoted += ch;
  }
  quoted += '"';
  return quoted;
}

class CsvWriter {
 public:
  explicit CsvWriter(const std::string& path) : out_(path, std::ios::binary) {
    if (!out_) throw std::runtime_error("cannot open " + path + " for writing");
  }

  void row(const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
      if (i) out_ << ',';
      out_ << csv_escape(fields[i]);
    }
    out_ << '\n';
  }

 private:
  std::ofstream out_;
};

// Fresh simulation seed for one sweep point, decorrelated from the channel
// streams but still a pure function of the spec seed.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag) {
  return Rng::for_stream(seed, 0x4d43u ^ (tag << 16)).next_u64();
}

enum class FloorStatus { kOk, kInactive, kInfeasible };

const char* status_name(FloorStatus s) {
  switch (s) {
    case FloorStatus::kOk: return "ok";
    case FloorStatus::kInactive: return "inactive";
    default: return "infeasible";
  }
}

// The proposed design at one sweep point.  A floor below the unconstrained
// optimum is inactive (closed form applies); a floor above P_T Xi_1 is
// infeasible and leaves the design empty.
struct Design {
  FloorStatus floor = FloorStatus::kInfeasible;
  PrecoderSolution sol;
  bool have_w = false;
  CMat w;
};

Design make_design(const ChannelDraw& draw, double p_t, double gamma1, double xi0,
                   const QamConstellation& c, const NoiseModel& noise) {
  const EigenBasis comm = eigen_basis(draw.comm.matrix.adjoint() * draw.comm.matrix);
  const EigenBasis sensing = eigen_basis(draw.h_dot.adjoint() * draw.h_dot);
  const auto [gamma_min, gamma_max] = gamma_range(comm, sensing, draw.h_dot, p_t);

  Design out;
  if (gamma1 > gamma_max) return out;
  if (gamma1 <= gamma_min) {
    out.floor = FloorStatus::kInactive;
    out.sol = ber_only_precoder(comm, p_t);
  } else {
    out.floor = FloorStatus::kOk;
    SolverConfig cfg;
    cfg.p_t = p_t;
    cfg.gamma1 = gamma1;
    cfg.xi0 = xi0;
    out.sol = solve_precoder(draw.comm.matrix, draw.h_dot, cfg, c, noise);
  }
  if (out.sol.v.size() > 0) {
    out.w = out.sol.precoder();
    out.have_w = true;
  }
  return out;
}

CMat uniform_precoder(int size, double p_t) {
  return std::sqrt(p_t / size) * CMat::Identity(size, size);
}

// Exact water level over the positive eigenvalues: rate upper bound
// sum log2(1 + p_i lambda_i / sigma^2) / dims at the optimal allocation.
double water_filling_capacity(const RVec& eigs, double p_t, double sigma_sq, int dims) {
  std::vector<double> floor_level;  // sigma^2 / lambda_i, ascending
  for (Eigen::Index i = 0; i < eigs.size(); ++i) {
    if (eigs(i) > 0.0) floor_level.push_back(sigma_sq / eigs(i));
  }
  std::sort(floor_level.begin(), floor_level.end());
  if (floor_level.empty()) return 0.0;

  double level = 0.0;
  std::size_t active = floor_level.size();
  for (; active >= 1; --active) {
    double used = p_t;
    for (std::size_t i = 0; i < active; ++i) used += floor_level[i];
    level = used / static_cast<double>(active);
    if (level >= floor_level[active - 1]) break;
  }
  double rate = 0.0;
  for (std::size_t i = 0; i < active; ++i) rate += std::log2(level / floor_level[i]);
  return rate / dims;
}

struct RunContext {
  QamConstellation constellation;
  NoiseModel noise;
  double gamma1;  // sensing trace floor from the first gamma_c entry
};

RunContext make_context(const ExperimentSpec& spec) {
  const NoiseModel noise{dbm_to_linear(spec.sigma_c_dbm), dbm_to_linear(spec.sigma_s_dbm)};
  return RunContext{QamConstellation::make(spec.mod_order), noise,
                    noise.sigma_s_sq / spec.gamma_c.front()};
}

void run_convergence(const ExperimentSpec& spec, CsvWriter& csv) {
  const RunContext ctx = make_context(spec);
  const double p_t = dbm_to_linear(*std::max_element(spec.power_dbm.begin(), spec.power_dbm.end()));
  csv.row({"seed", "realization", "iteration", "lagrangian", "lambda", "mu", "status"});
  for (int r = 0; r < spec.realizations; ++r) {
    const ChannelDraw draw = sample_channels(spec, r);
    const Design dsg = make_design(draw, p_t, ctx.gamma1, spec.xi0, ctx.constellation, ctx.noise);
    const std::string seed = std::to_string(spec.seed);
    const std::string real = std::to_string(r);
    if (dsg.sol.history.empty()) {
      csv.row({seed, real, "", "", "", "", status_name(dsg.floor)});
      continue;
    }
    for (const IterationRecord& rec : dsg.sol.history) {
      csv.row({seed, real, std::to_string(rec.iteration), fmt(rec.lagrangian), fmt(rec.lambda),
               fmt(rec.mu), status_name(dsg.floor)});
    }
  }
}

void run_ber_vs_power(const ExperimentSpec& spec, CsvWriter& csv) {
  const RunContext ctx = make_context(spec);
  const int size = spec.m * spec.n;
  csv.row({"seed", "realization", "P_T_dBm", "scheme", "analytic_ber", "empirical_ber", "ci",
           "status"});
  for (std::size_t pi = 0; pi < spec.power_dbm.size(); ++pi) {
    const double p_t = dbm_to_linear(spec.power_dbm[pi]);
    for (int r = 0; r < spec.realizations; ++r) {
      const ChannelDraw draw = sample_channels(spec, r);
      const std::string seed = std::to_string(spec.seed);
      const std::string real = std::to_string(r);
      const std::string power = fmt(spec.power_dbm[pi]);

      const Design dsg = make_design(draw, p_t, ctx.gamma1, spec.xi0, ctx.constellation, ctx.noise);
      const auto point_tag = [&](std::uint64_t scheme) {
        return (scheme * spec.power_dbm.size() + pi) * spec.realizations + r;
      };
      if (dsg.have_w) {
        const RVec sinr = sinr_per_symbol(dsg.w, draw.comm.matrix, ctx.noise, Equalizer::kZf);
        SimConfig sim{spec.blocks, derive_seed(spec.seed, point_tag(0)), Equalizer::kZf,
                      ctx.constellation, ctx.noise};
        const BerEstimate est = simulate_ber(draw.comm, dsg.w, sim);
        csv.row({seed, real, power, "proposed", fmt(average_ber(sinr, ctx.constellation)),
                 fmt(est.ber), fmt(est.ci95_halfwidth), status_name(dsg.floor)});
        csv.row({seed, real, power, "lower-bound",
                 fmt(ber_lower_bound(dsg.w, draw.comm.matrix, ctx.noise, ctx.constellation)), "",
                 "", status_name(dsg.floor)});
      } else {
        csv.row({seed, real, power, "proposed", "", "", "", status_name(dsg.floor)});
        csv.row({seed, real, power, "lower-bound", "", "", "", status_name(dsg.floor)});
      }

      // equalizer-only benchmarks: no precoder (identity, unit symbol energy)
      // and no sensing floor, so the curves barely move with the budget
      const CMat wid = CMat::Identity(size, size);
      const std::pair<const char*, Equalizer> baselines[] = {{"zf", Equalizer::kZf},
                                                             {"mmse", Equalizer::kMmse}};
      for (std::uint64_t b = 0; b < 2; ++b) {
        const auto& [name, eq] = baselines[b];
        const RVec sinr = sinr_per_symbol(wid, draw.comm.matrix, ctx.noise, eq);
        SimConfig sim{spec.blocks, derive_seed(spec.seed, point_tag(1 + b)), eq,
                      ctx.constellation, ctx.noise};
        const BerEstimate est = simulate_ber(draw.comm, wid, sim);
        csv.row({seed, real, power, name, fmt(average_ber(sinr, ctx.constellation)), fmt(est.ber),
                 fmt(est.ci95_halfwidth), "ok"});
      }
    }
  }
}

void run_diag_elements(const ExperimentSpec& spec, CsvWriter& csv) {
  const RunContext ctx = make_context(spec);
  const int size = spec.m * spec.n;
  const double p_t = dbm_to_linear(*std::max_element(spec.power_dbm.begin(), spec.power_dbm.end()));
  csv.row({"seed", "realization", "index", "scheme", "diag_value", "status"});
  for (int r = 0; r < spec.realizations; ++r) {
    const ChannelDraw draw = sample_channels(spec, r);
    const std::string seed = std::to_string(spec.seed);
    const std::string real = std::to_string(r);

    const Design dsg = make_design(draw, p_t, ctx.gamma1, spec.xi0, ctx.constellation, ctx.noise);
    if (dsg.have_w) {
      const RVec diag = zf_mse_matrix(dsg.w, draw.comm.matrix, 1.0).diagonal().real();
      for (int i = 0; i < size; ++i) {
        csv.row({seed, real, std::to_string(i), "proposed", fmt(diag(i)),
                 status_name(dsg.floor)});
      }
    } else {
      csv.row({seed, real, "", "proposed", "", status_name(dsg.floor)});
    }

    // equalizer-only benchmarks, no precoder
    const CMat wid = CMat::Identity(size, size);
    const RVec diag = zf_mse_matrix(wid, draw.comm.matrix, 1.0).diagonal().real();
    for (int i = 0; i < size; ++i) {
      csv.row({seed, real, std::to_string(i), "zf", fmt(diag(i)), "ok"});
    }
    const RVec sinr = sinr_per_symbol(wid, draw.comm.matrix, ctx.noise, Equalizer::kMmse);
    for (int i = 0; i < size; ++i) {
      const double g_ii = 1.0 / (ctx.noise.sigma_c_sq * (sinr(i) + 1.0));
      csv.row({seed, real, std::to_string(i), "mmse", fmt(g_ii), "ok"});
    }
  }
}

void run_ber_vs_crb(const ExperimentSpec& spec, CsvWriter& csv) {
  const RunContext ctx = make_context(spec);
  csv.row({"seed", "realization", "gamma_c", "P_T_dBm", "ber", "status"});
  for (const double gamma_c : spec.gamma_c) {
    const double gamma1 = ctx.noise.sigma_s_sq / gamma_c;
    for (const double power_dbm : spec.power_dbm) {
      const double p_t = dbm_to_linear(power_dbm);
      for (int r = 0; r < spec.realizations; ++r) {
        const ChannelDraw draw = sample_channels(spec, r);
        const Design dsg = make_design(draw, p_t, gamma1, spec.xi0, ctx.constellation, ctx.noise);
        std::string ber;
        if (dsg.have_w) {
          const RVec sinr = sinr_per_symbol(dsg.w, draw.comm.matrix, ctx.noise, Equalizer::kZf);
          ber = fmt(average_ber(sinr, ctx.constellation));
        }
        csv.row({std::to_string(spec.seed), std::to_string(r), fmt(gamma_c), fmt(power_dbm), ber,
                 status_name(dsg.floor)});
      }
    }
  }
}

void run_symbol_sweep(const ExperimentSpec& spec, CsvWriter& csv) {
  const RunContext ctx = make_context(spec);
  const int size = spec.m * spec.n;
  csv.row({"seed", "realization", "K", "P_T_dBm", "ber_lb", "crb", "capacity", "status"});
  for (const double power_dbm : spec.power_dbm) {
    const double p_t = dbm_to_linear(power_dbm);
    for (int r = 0; r < spec.realizations; ++r) {
      const ChannelDraw draw = sample_channels(spec, r);
      const EigenBasis comm = eigen_basis(draw.comm.matrix.adjoint() * draw.comm.matrix);
      const EigenBasis sensing = eigen_basis(draw.h_dot.adjoint() * draw.h_dot);
      const std::string seed = std::to_string(spec.seed);
      const std::string real = std::to_string(r);
      const std::string power = fmt(power_dbm);

      for (int k = 1; k <= size; ++k) {
        const std::string bound =
            fmt(ber_only_lower_bound_k(comm.values, k, p_t, ctx.noise, ctx.constellation));
        std::string crb, capacity, status = "ok";
        if (k == 1) {
          try {
            const CMat w1 = single_symbol_precoder(comm, sensing, ctx.gamma1, p_t);
            crb = fmt(compute_crb(w1, draw.h_dot, ctx.noise));
            capacity = fmt(achievable_capacity(w1, draw.comm.matrix, ctx.noise.sigma_c_sq));
          } catch (const std::domain_error&) {
            status = "infeasible";
          }
        } else if (k == size) {
          const Design dsg =
              make_design(draw, p_t, ctx.gamma1, spec.xi0, ctx.constellation, ctx.noise);
          status = status_name(dsg.floor);
          if (dsg.have_w) {
            crb = fmt(compute_crb(dsg.w, draw.h_dot, ctx.noise));
            capacity = fmt(achievable_capacity(dsg.w, draw.comm.matrix, ctx.noise.sigma_c_sq));
          }
        }
        csv.row({seed, real, std::to_string(k), power, bound, crb, capacity, status});
      }
    }
  }
}

void run_capacity_sweep(const ExperimentSpec& spec, CsvWriter& csv) {
  const RunContext ctx = make_context(spec);
  const int size = spec.m * spec.n;
  csv.row({"seed", "realization", "P_T_dBm", "scheme", "R", "status"});
  for (const double power_dbm : spec.power_dbm) {
    const double p_t = dbm_to_linear(power_dbm);
    for (int r = 0; r < spec.realizations; ++r) {
      const ChannelDraw draw = sample_channels(spec, r);
      const std::string seed = std::to_string(spec.seed);
      const std::string real = std::to_string(r);
      const std::string power = fmt(power_dbm);

      const Design dsg = make_design(draw, p_t, ctx.gamma1, spec.xi0, ctx.constellation, ctx.noise);
      if (dsg.have_w) {
        csv.row({seed, real, power, "proposed",
                 fmt(achievable_capacity(dsg.w, draw.comm.matrix, ctx.noise.sigma_c_sq)),
                 status_name(dsg.floor)});
      } else {
        csv.row({seed, real, power, "proposed", "", status_name(dsg.floor)});
      }

      csv.row({seed, real, power, "uniform",
               fmt(achievable_capacity(uniform_precoder(size, p_t), draw.comm.matrix,
                                       ctx.noise.sigma_c_sq)),
               "ok"});

      const EigenBasis comm = eigen_basis(draw.comm.matrix.adjoint() * draw.comm.matrix);
      csv.row({seed, real, power, "water-filling",
               fmt(water_filling_capacity(comm.values, p_t, ctx.noise.sigma_c_sq, size)), "ok"});
    }
  }
}

nlohmann::json config_json(const ExperimentSpec& spec) {
  return nlohmann::json{{"kind", to_string(spec.kind)},
                        {"m", spec.m},
                        {"n", spec.n},
                        {"delta_f_hz", spec.delta_f_hz},
                        {"mod_order", spec.mod_order},
                        {"num_paths", spec.num_paths},
                        {"l_max", spec.l_max},
                        {"k_max", spec.k_max},
                        {"sigma_c_dbm", spec.sigma_c_dbm},
                        {"sigma_s_dbm", spec.sigma_s_dbm},
                        {"power_dbm", spec.power_dbm},
                        {"gamma_c", spec.gamma_c},
                        {"seed", spec.seed},
                        {"realizations", spec.realizations},
                        {"blocks", spec.blocks},
                        {"xi0", spec.xi0},
                        {"output_dir", spec.output_dir}};
}

}  // namespace

std::string to_string(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::kConvergence: return "convergence";
    case ExperimentKind::kBerVsPower: return "ber-vs-power";
    case ExperimentKind::kDiagElements: return "diag-elements";
    case ExperimentKind::kBerVsCrb: return "ber-vs-crb";
    case ExperimentKind::kSymbolSweep: return "symbol-sweep";
    default: return "capacity-sweep";
  }
}

ExperimentKind experiment_kind_from_string(const std::string& name) {
  for (const ExperimentKind kind :
       {ExperimentKind::kConvergence, ExperimentKind::kBerVsPower, ExperimentKind::kDiagElements,
        ExperimentKind::kBerVsCrb, ExperimentKind::kSymbolSweep, ExperimentKind::kCapacitySweep}) {
    if (to_string(kind) == name) return kind;
  }
  throw ConfigError("unknown experiment kind '" + name + "'");
}

double dbm_to_linear(double dbm) { return std::pow(10.0, dbm / 10.0); }

ExperimentSpec parse_config_text(const std::string& text) {
  ExperimentSpec spec;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const std::string_view body = trim(line);
    if (body.empty()) continue;

    const auto eq = body.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
    }
    const std::string key{trim(body.substr(0, eq))};
    const std::string value{trim(body.substr(eq + 1))};
    const auto fail = [&](const char* what) {
      throw ConfigError("line " + std::to_string(lineno) + ": " + what + " for key '" + key +
                        "'");
    };

    if (key == "kind") {
      try {
        spec.kind = experiment_kind_from_string(value);
      } catch (const ConfigError&) {
        fail("unknown experiment kind");
      }
    } else if (key == "m") {
      if (!parse_int(value, spec.m)) fail("invalid integer");
    } else if (key == "n") {
      if (!parse_int(value, spec.n)) fail("invalid integer");
    } else if (key == "delta_f_hz") {
      if (!parse_double(value, spec.delta_f_hz)) fail("invalid number");
    } else if (key == "mod_order") {
      if (!parse_int(value, spec.mod_order)) fail("invalid integer");
    } else if (key == "num_paths") {
      if (!parse_int(value, spec.num_paths)) fail("invalid integer");
    } else if (key == "l_max") {
      if (!parse_int(value, spec.l_max)) fail("invalid integer");
    } else if (key == "k_max") {
      if (!parse_double(value, spec.k_max)) fail("invalid number");
    } else if (key == "sigma_c_dbm") {
      if (!parse_double(value, spec.sigma_c_dbm)) fail("invalid number");
    } else if (key == "sigma_s_dbm") {
      if (!parse_double(value, spec.sigma_s_dbm)) fail("invalid number");
    } else if (key == "power_dbm") {
      if (!parse_double_list(value, spec.power_dbm)) fail("invalid number list");
    } else if (key == "gamma_c") {
      if (!parse_double_list(value, spec.gamma_c)) fail("invalid number list");
    } else if (key == "seed") {
      if (!parse_u64(value, spec.seed)) fail("invalid unsigned integer");
    } else if (key == "realizations") {
      if (!parse_int(value, spec.realizations)) fail("invalid integer");
    } else if (key == "blocks") {
      if (!parse_int(value, spec.blocks)) fail("invalid integer");
    } else if (key == "xi0") {
      if (!parse_double(value, spec.xi0)) fail("invalid number");
    } else if (key == "output_dir") {
      if (value.empty()) fail("empty value");
      spec.output_dir = value;
    } else {
      throw ConfigError("line " + std::to_string(lineno) + ": unknown key '" + key + "'");
    }
  }
  validate_spec(spec);
  return spec;
}

ExperimentSpec parse_config_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config_text(text.str());
}

std::string emit_config(const ExperimentSpec& spec) {
  std::ostringstream out;
  out << "kind = " << to_string(spec.kind) << '\n'
      << "m = " << spec.m << '\n'
      << "n = " << spec.n << '\n'
      << "delta_f_hz = " << fmt(spec.delta_f_hz) << '\n'
      << "mod_order = " << spec.mod_order << '\n'
      << "num_paths = " << spec.num_paths << '\n'
      << "l_max = " << spec.l_max << '\n'
      << "k_max = " << fmt(spec.k_max) << '\n'
      << "sigma_c_dbm = " << fmt(spec.sigma_c_dbm) << '\n'
      << "sigma_s_dbm = " << fmt(spec.sigma_s_dbm) << '\n'
      << "power_dbm = " << join(spec.power_dbm) << '\n'
      << "gamma_c = " << join(spec.gamma_c) << '\n'
      << "seed = " << spec.seed << '\n'
      << "realizations = " << spec.realizations << '\n'
      << "blocks = " << spec.blocks << '\n'
      << "xi0 = " << fmt(spec.xi0) << '\n'
      << "output_dir = " << spec.output_dir << '\n';
  return out.str();
}

void validate_spec(const ExperimentSpec& spec) {
  const auto reject = [](const std::string& why) { throw ConfigError(why); };
  if (spec.m < 1) reject("m must be >= 1");
  if (spec.n < 1) reject("n must be >= 1");
  if (!(spec.delta_f_hz > 0) || !std::isfinite(spec.delta_f_hz)) {
    reject("delta_f_hz must be a positive number");
  }
  if (spec.mod_order < 4 || (spec.mod_order & (spec.mod_order - 1)) != 0) {
    reject("mod_order must be a power of two >= 4");
  }
  if (spec.num_paths < 1) reject("num_paths must be >= 1");
  if (spec.l_max < 0 || spec.l_max >= spec.m * spec.n) {
    reject("l_max must lie in [0, m*n)");
  }
  if (!(spec.k_max >= 0) || !std::isfinite(spec.k_max)) reject("k_max must be >= 0");
  if (spec.power_dbm.empty()) reject("power_dbm must be a nonempty sweep");
  for (const double p : spec.power_dbm) {
    if (!std::isfinite(p)) reject("power_dbm entries must be finite");
  }
  if (spec.gamma_c.empty()) reject("gamma_c must be a nonempty sweep");
  for (const double g : spec.gamma_c) {
    if (!(g > 0) || !std::isfinite(g)) reject("gamma_c entries must be positive");
  }
  if (spec.realizations < 1) reject("realizations must be >= 1");
  if (spec.blocks < 1) reject("blocks must be >= 1");
  if (!(spec.xi0 > 0) || !std::isfinite(spec.xi0)) reject("xi0 must be positive");
  if (spec.output_dir.empty()) reject("output_dir must be nonempty");
  if (spec.output_dir.find_first_of("#\r\n") != std::string::npos) {
    reject("output_dir must not contain '#' or line breaks");
  }
}

ChannelDraw sample_channels(const ExperimentSpec& spec, std::uint64_t realization) {
  const OtfsGrid grid(spec.m, spec.n, spec.delta_f_hz);
  // normalized Doppler: one tap per unit, so the derivative grid uses T = 1/N
  const OtfsGrid tap_grid(spec.m, spec.n, spec.delta_f_hz, 1.0 / spec.n);

  Rng comm_rng = Rng::for_stream(spec.seed, 2 * realization);
  PathSet paths(spec.num_paths);
  for (PathParams& p : paths) {
    p.gain = comm_rng.next_cgaussian(1.0 / spec.num_paths);
    p.delay_tap = std::min(spec.l_max,
                           static_cast<int>(comm_rng.next_double() * (spec.l_max + 1)));
    p.doppler_tap = (2.0 * comm_rng.next_double() - 1.0) * spec.k_max;
  }

  Rng sensing_rng = Rng::for_stream(spec.seed, 2 * realization + 1);
  PathParams target;
  target.gain = 1.0;
  target.delay_tap = std::min(spec.l_max,
                              static_cast<int>(sensing_rng.next_double() * (spec.l_max + 1)));
  target.doppler_tap = (2.0 * sensing_rng.next_double() - 1.0) * spec.k_max;

  return ChannelDraw{dd_channel(paths, grid), dd_channel({target}, grid),
                     doppler_derivative_channel(target, tap_grid)};
}

RunResult run_experiment(const ExperimentSpec& spec, bool quiet) {
  validate_spec(spec);
  namespace fs = std::filesystem;
  fs::create_directories(spec.output_dir);
  const auto started = std::chrono::steady_clock::now();

  const std::string csv_name = to_string(spec.kind) + ".csv";
  const fs::path csv_path = fs::path(spec.output_dir) / csv_name;
  {
    CsvWriter csv(csv_path.string());
    switch (spec.kind) {
      case ExperimentKind::kConvergence: run_convergence(spec, csv); break;
      case ExperimentKind::kBerVsPower: run_ber_vs_power(spec, csv); break;
      case ExperimentKind::kDiagElements: run_diag_elements(spec, csv); break;
      case ExperimentKind::kBerVsCrb: run_ber_vs_crb(spec, csv); break;
      case ExperimentKind::kSymbolSweep: run_symbol_sweep(spec, csv); break;
      case ExperimentKind::kCapacitySweep: run_capacity_sweep(spec, csv); break;
    }
  }

  const double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  nlohmann::json manifest{{"library_version", DDISAC_VERSION},
                          {"kind", to_string(spec.kind)},
                          {"config", config_json(spec)},
                          {"csv_files", {csv_name}},
                          {"wall_clock_seconds", elapsed}};
  const fs::path manifest_path = fs::path(spec.output_dir) / "manifest.json";
  {
    std::ofstream out(manifest_path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + manifest_path.string() + " for writing");
    out << manifest.dump(2) << '\n';
  }

  if (!quiet) {
    std::cout << "wrote " << csv_path.string() << '\n'
              << "wrote " << manifest_path.string() << '\n';
  }
  return RunResult{{csv_path.string()}, manifest_path.string()};
}

}  // namespace ddisac
