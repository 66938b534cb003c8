// Python bindings for the delay-Doppler ISAC library: channel construction,
// link metrics, the precoder solver, the Monte-Carlo simulator and the
// experiment runner.
#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "ddisac/experiments.hpp"
#include "ddisac/linalg.hpp"
#include "ddisac/metrics.hpp"
#include "ddisac/montecarlo.hpp"
#include "ddisac/otfs.hpp"
#include "ddisac/qam.hpp"
#include "ddisac/rng.hpp"
#include "ddisac/solver.hpp"

namespace py = pybind11;
using namespace ddisac;

PYBIND11_MODULE(_ddisac, m) {
  m.doc() = "Delay-Doppler ISAC precoder design and OTFS link simulation";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<NonConvergenceError>(m, "NonConvergenceError", PyExc_RuntimeError);

  py::class_<OtfsGrid>(m, "OtfsGrid")
      .def(py::init<int, int, double>(), py::arg("m"), py::arg("n"), py::arg("delta_f"))
      .def(py::init<int, int, double, double>(), py::arg("m"), py::arg("n"), py::arg("delta_f"),
           py::arg("t"))
      .def_readonly("m", &OtfsGrid::M)
      .def_readonly("n", &OtfsGrid::N)
      .def_readonly("delta_f", &OtfsGrid::delta_f)
      .def_readonly("t", &OtfsGrid::T)
      .def("frame_size", &OtfsGrid::frame_size)
      .def("frame_duration", &OtfsGrid::frame_duration);

  py::class_<PathParams>(m, "PathParams")
      .def(py::init([](cxd gain, int delay_tap, double doppler_tap) {
             return PathParams{gain, delay_tap, doppler_tap};
           }),
           py::arg("gain") = cxd{1.0, 0.0}, py::arg("delay_tap") = 0,
           py::arg("doppler_tap") = 0.0)
      .def_readwrite("gain", &PathParams::gain)
      .def_readwrite("delay_tap", &PathParams::delay_tap)
      .def_readwrite("doppler_tap", &PathParams::doppler_tap);

  py::class_<DdChannel>(m, "DdChannel")
      .def_readonly("matrix", &DdChannel::matrix)
      .def_readonly("grid", &DdChannel::grid);

  py::class_<NoiseModel>(m, "NoiseModel")
      .def(py::init<double, double>(), py::arg("sigma_c_sq"), py::arg("sigma_s_sq"))
      .def_readonly("sigma_c_sq", &NoiseModel::sigma_c_sq)
      .def_readonly("sigma_s_sq", &NoiseModel::sigma_s_sq);

  py::class_<QamConstellation>(m, "QamConstellation")
      .def_static("make", &QamConstellation::make, py::arg("order"))
      .def_readonly("order", &QamConstellation::order)
      .def_readonly("points", &QamConstellation::points)
      .def_readonly("alpha", &QamConstellation::alpha)
      .def_readonly("beta", &QamConstellation::beta)
      .def("bits_per_symbol", &QamConstellation::bits_per_symbol);

  m.def("dft_matrix", &dft_matrix, py::arg("n"), "unitary DFT matrix");
  m.def("time_domain_channel", &time_domain_channel, py::arg("paths"), py::arg("grid"));
  m.def("dd_channel", &dd_channel, py::arg("paths"), py::arg("grid"));
  m.def("doppler_derivative_channel", &doppler_derivative_channel, py::arg("path"),
        py::arg("grid"));
  m.def("otfs_modulate", &otfs_modulate, py::arg("x_dd"), py::arg("grid"));
  m.def("otfs_demodulate", &otfs_demodulate, py::arg("r"), py::arg("grid"));

  py::enum_<Equalizer>(m, "Equalizer")
      .value("ZF", Equalizer::kZf)
      .value("MMSE", Equalizer::kMmse);

  m.def("q_function", &q_function, py::arg("x"));
  m.def("sinr_per_symbol", &sinr_per_symbol, py::arg("w"), py::arg("h"), py::arg("noise"),
        py::arg("equalizer"));
  m.def("average_ber", &average_ber, py::arg("sinr"), py::arg("constellation"));
  m.def("ber_lower_bound", &ber_lower_bound, py::arg("w"), py::arg("h"), py::arg("noise"),
        py::arg("constellation"));
  m.def("ber_only_lower_bound_k", &ber_only_lower_bound_k, py::arg("eigs"), py::arg("k"),
        py::arg("p_t"), py::arg("noise"), py::arg("constellation"));
  m.def("fisher_information", &fisher_information, py::arg("w"), py::arg("h_dot"),
        py::arg("noise"));
  m.def("compute_crb", &compute_crb, py::arg("w"), py::arg("h_dot"), py::arg("noise"));
  m.def("achievable_capacity", &achievable_capacity, py::arg("w"), py::arg("h"),
        py::arg("sigma_c_sq"));

  py::class_<EigenBasis>(m, "EigenBasis")
      .def_readonly("vectors", &EigenBasis::vectors)
      .def_readonly("values", &EigenBasis::values);
  m.def("eigen_basis", &eigen_basis, py::arg("gram"));

  py::class_<SolverConfig>(m, "SolverConfig")
      .def(py::init<>())
      .def_readwrite("p_t", &SolverConfig::p_t)
      .def_readwrite("gamma1", &SolverConfig::gamma1)
      .def_readwrite("xi0", &SolverConfig::xi0)
      .def_readwrite("max_iterations", &SolverConfig::max_iterations)
      .def_readwrite("radius_scale", &SolverConfig::radius_scale);

  py::class_<IterationRecord>(m, "IterationRecord")
      .def_readonly("iteration", &IterationRecord::iteration)
      .def_readonly("lambda_", &IterationRecord::lambda)
      .def_readonly("mu", &IterationRecord::mu)
      .def_readonly("lagrangian", &IterationRecord::lagrangian)
      .def_readonly("stop_metric", &IterationRecord::stop_metric);

  py::class_<PrecoderSolution>(m, "PrecoderSolution")
      .def_readonly("u", &PrecoderSolution::u)
      .def_readonly("sigma", &PrecoderSolution::sigma)
      .def_readonly("v", &PrecoderSolution::v)
      .def_readonly("covariance", &PrecoderSolution::covariance)
      .def_readonly("lambda_", &PrecoderSolution::lambda)
      .def_readonly("mu", &PrecoderSolution::mu)
      .def_readonly("feasible", &PrecoderSolution::feasible)
      .def_readonly("objective", &PrecoderSolution::objective)
      .def_readonly("history", &PrecoderSolution::history)
      .def("precoder", &PrecoderSolution::precoder);

  m.def("crb_only_precoder", &crb_only_precoder, py::arg("sensing"), py::arg("p_t"));
  m.def("ber_only_precoder", &ber_only_precoder, py::arg("comm"), py::arg("p_t"));
  m.def("gamma_range", &gamma_range, py::arg("comm"), py::arg("sensing"), py::arg("h_dot"),
        py::arg("p_t"));
  m.def("optimal_covariance", &optimal_covariance, py::arg("lambda_"), py::arg("mu"),
        py::arg("comm"), py::arg("sensing"));
  m.def("single_symbol_precoder", &single_symbol_precoder, py::arg("comm"), py::arg("sensing"),
        py::arg("gamma1"), py::arg("p_t"));
  m.def("solve_precoder", &solve_precoder, py::arg("h_c"), py::arg("h_dot"), py::arg("config"),
        py::arg("constellation"), py::arg("noise"));

  py::class_<SimConfig>(m, "SimConfig")
      .def(py::init<>())
      .def_readwrite("blocks", &SimConfig::blocks)
      .def_readwrite("seed", &SimConfig::seed)
      .def_readwrite("equalizer", &SimConfig::equalizer)
      .def_readwrite("constellation", &SimConfig::constellation)
      .def_readwrite("noise", &SimConfig::noise)
      .def_readwrite("target_error_events", &SimConfig::target_error_events);

  py::class_<BerEstimate>(m, "BerEstimate")
      .def_readonly("bit_errors", &BerEstimate::bit_errors)
      .def_readonly("bits_total", &BerEstimate::bits_total)
      .def_readonly("ber", &BerEstimate::ber)
      .def_readonly("ci95_halfwidth", &BerEstimate::ci95_halfwidth)
      .def_readonly("blocks_run", &BerEstimate::blocks_run);

  m.def("zf_equalizer", &zf_equalizer, py::arg("h"), py::arg("w"));
  m.def("mmse_equalizer", &mmse_equalizer, py::arg("h"), py::arg("w"), py::arg("noise"));
  m.def("simulate_ber", &simulate_ber, py::arg("channel"), py::arg("precoder"), py::arg("sim"));

  py::enum_<ExperimentKind>(m, "ExperimentKind")
      .value("CONVERGENCE", ExperimentKind::kConvergence)
      .value("BER_VS_POWER", ExperimentKind::kBerVsPower)
      .value("DIAG_ELEMENTS", ExperimentKind::kDiagElements)
      .value("BER_VS_CRB", ExperimentKind::kBerVsCrb)
      .value("SYMBOL_SWEEP", ExperimentKind::kSymbolSweep)
      .value("CAPACITY_SWEEP", ExperimentKind::kCapacitySweep);

  py::class_<ExperimentSpec>(m, "ExperimentSpec")
      .def(py::init<>())
      .def_readwrite("kind", &ExperimentSpec::kind)
      .def_readwrite("m", &ExperimentSpec::m)
      .def_readwrite("n", &ExperimentSpec::n)
      .def_readwrite("delta_f_hz", &ExperimentSpec::delta_f_hz)
      .def_readwrite("mod_order", &ExperimentSpec::mod_order)
      .def_readwrite("num_paths", &ExperimentSpec::num_paths)
      .def_readwrite("l_max", &ExperimentSpec::l_max)
      .def_readwrite("k_max", &ExperimentSpec::k_max)
      .def_readwrite("sigma_c_dbm", &ExperimentSpec::sigma_c_dbm)
      .def_readwrite("sigma_s_dbm", &ExperimentSpec::sigma_s_dbm)
      .def_readwrite("power_dbm", &ExperimentSpec::power_dbm)
      .def_readwrite("gamma_c", &ExperimentSpec::gamma_c)
      .def_readwrite("seed", &ExperimentSpec::seed)
      .def_readwrite("realizations", &ExperimentSpec::realizations)
      .def_readwrite("blocks", &ExperimentSpec::blocks)
      .def_readwrite("xi0", &ExperimentSpec::xi0)
      .def_readwrite("output_dir", &ExperimentSpec::output_dir);

  py::class_<ChannelDraw>(m, "ChannelDraw")
      .def_readonly("comm", &ChannelDraw::comm)
      .def_readonly("sensing", &ChannelDraw::sensing)
      .def_readonly("h_dot", &ChannelDraw::h_dot);

  py::class_<RunResult>(m, "RunResult")
      .def_readonly("csv_files", &RunResult::csv_files)
      .def_readonly("manifest_file", &RunResult::manifest_file);

  m.def("parse_config_text", &parse_config_text, py::arg("text"));
  m.def("parse_config_file", &parse_config_file, py::arg("path"));
  m.def("emit_config", &emit_config, py::arg("spec"));
  m.def("validate_spec", &validate_spec, py::arg("spec"));
  m.def("dbm_to_linear", &dbm_to_linear, py::arg("dbm"));
  m.def("sample_channels", &sample_channels, py::arg("spec"), py::arg("realization"));
  m.def("run_experiment", &run_experiment, py::arg("spec"), py::arg("quiet") = true);
}
