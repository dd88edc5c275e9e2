#include <algorithm>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "fluxrelax/analysis.hpp"
#include "fluxrelax/cli.hpp"
#include "fluxrelax/dynamics.hpp"
#include "fluxrelax/errors.hpp"
#include "fluxrelax/hamiltonian.hpp"
#include "fluxrelax/io.hpp"
#include "fluxrelax/loss_models.hpp"
#include "fluxrelax/resonator.hpp"
#include "fluxrelax/statistics.hpp"

namespace py = pybind11;
using namespace fluxrelax;

PYBIND11_MODULE(_core, m) {
  m.doc() = "Fluxonium spectrum, loss models, multilevel T1 and Q_C^eff extraction";

  auto& error = py::register_exception<Error>(m, "Error");
  py::register_exception<DataError>(m, "DataError", error.ptr());
  py::register_exception<NumericalError>(m, "NumericalError", error.ptr());
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const InvalidArgument& e) {
      py::set_error(PyExc_ValueError, e.what());
    }
  });

  py::class_<FluxoniumParams>(m, "FluxoniumParams")
      .def(py::init([](double ej, double ec, double el) { return FluxoniumParams{ej, ec, el}; }),
           py::arg("ej"), py::arg("ec"), py::arg("el"))
      .def_readwrite("ej", &FluxoniumParams::ej)
      .def_readwrite("ec", &FluxoniumParams::ec)
      .def_readwrite("el", &FluxoniumParams::el)
      .def("c_sigma", &FluxoniumParams::c_sigma);

  py::class_<ResonatorParams>(m, "ResonatorParams")
      .def(py::init([](double omega_res, double g, double kappa, double z0) {
             return ResonatorParams{omega_res, g, kappa, z0};
           }),
           py::arg("omega_res"), py::arg("g"), py::arg("kappa"), py::arg("z0") = 50.0)
      .def_readwrite("omega_res", &ResonatorParams::omega_res)
      .def_readwrite("g", &ResonatorParams::g)
      .def_readwrite("kappa", &ResonatorParams::kappa)
      .def_readwrite("z0", &ResonatorParams::z0);

  py::class_<Environment>(m, "Environment")
      .def(py::init<>())
      .def_readwrite("t_qubit", &Environment::t_qubit)
      .def_readwrite("t_res", &Environment::t_res)
      .def_readwrite("a_phi", &Environment::a_phi)
      .def_readwrite("alpha", &Environment::alpha)
      .def_readwrite("x_qp", &Environment::x_qp)
      .def_readwrite("gap", &Environment::gap)
      .def_readwrite("c_drive", &Environment::c_drive)
      .def_readwrite("m_drive", &Environment::m_drive)
      .def_readwrite("n_array", &Environment::n_array)
      .def_readwrite("qc_eff", &Environment::qc_eff)
      .def_readwrite("epsilon", &Environment::epsilon);

  py::class_<DeviceModel>(m, "DeviceModel")
      .def_readonly("qubit_id", &DeviceModel::qubit_id)
      .def_readonly("process_label", &DeviceModel::process_label)
      .def_readonly("params", &DeviceModel::params)
      .def_readonly("res", &DeviceModel::res)
      .def_readonly("env", &DeviceModel::env);

  py::enum_<Mechanism>(m, "Mechanism")
      .value("capacitive", Mechanism::capacitive)
      .value("flux_noise", Mechanism::flux_noise)
      .value("qp_junction", Mechanism::qp_junction)
      .value("qp_array", Mechanism::qp_array)
      .value("charge_line", Mechanism::charge_line)
      .value("flux_line", Mechanism::flux_line)
      .value("purcell", Mechanism::purcell);

  py::enum_<T1Mode>(m, "T1Mode")
      .value("two_level", T1Mode::two_level)
      .value("multilevel_population", T1Mode::multilevel_population)
      .value("multilevel_signal", T1Mode::multilevel_signal);

  py::class_<Spectrum>(m, "Spectrum")
      .def_property_readonly("energies", &Spectrum::energies)
      .def_property_readonly("n_elem", &Spectrum::n_elem)
      .def_property_readonly("phi_elem", &Spectrum::phi_elem)
      .def_property_readonly("sin_half_elem", &Spectrum::sin_half_elem)
      .def_property_readonly("phi_ext", &Spectrum::phi_ext)
      .def_property_readonly("basis_dim", &Spectrum::basis_dim)
      .def("transition_frequency", &Spectrum::transition_frequency);

  m.def("diagonalize",
        [](const FluxoniumParams& p, double phi_ext, std::size_t n_levels) {
          return diagonalize(p, {phi_ext}, n_levels);
        },
        py::arg("params"), py::arg("phi_ext"), py::arg("n_levels") = 6);
  m.def("flux_dispersion",
        [](const FluxoniumParams& p, double phi_ext) { return flux_dispersion(p, FluxBias{phi_ext}); },
        py::arg("params"), py::arg("phi_ext"));
  m.def("dispersive_shifts",
        [](const Spectrum& s, const ResonatorParams& r) { return dispersive_shifts(s, r); },
        py::arg("spectrum"), py::arg("res"));
  m.def("pair_rate",
        [](const Spectrum& s, const FluxoniumParams& p, const ResonatorParams& r, const Environment& e,
           Mechanism mech, std::size_t i, std::size_t j) { return pair_rate(s, p, r, e, mech, i, j); },
        py::arg("spectrum"), py::arg("params"), py::arg("res"), py::arg("env"), py::arg("mechanism"),
        py::arg("i") = 0, py::arg("j") = 1);
  m.def("predicted_t1",
        [](const FluxoniumParams& p, const ResonatorParams& r, const Environment& e, double phi_ext, T1Mode mode,
           std::vector<Mechanism> mechs, std::size_t n_levels) {
          T1Options o;
          o.n_levels = n_levels;
          o.chi_levels = std::max<std::size_t>(n_levels, 10);
          return predicted_t1(p, r, e, {phi_ext}, mode, mechs, o);
        },
        py::arg("params"), py::arg("res"), py::arg("env"), py::arg("phi_ext"),
        py::arg("mode") = T1Mode::multilevel_population, py::arg("mechanisms") = kDefaultMechanisms,
        py::arg("n_levels") = 6);
  m.def("extract_qceff",
        [](const DeviceModel& d, double phi_ext, double t1, T1Mode mode) {
          ExtractionOptions o;
          o.mode = mode;
          return extract_qceff(T1Record{phi_ext, std::nullopt, t1, std::nullopt, 1}, d, o);
        },
        py::arg("device"), py::arg("phi_ext"), py::arg("t1"), py::arg("mode") = T1Mode::multilevel_signal);
  m.def("parse_device_json",
        [](const std::string& text) { return io::parse_device_json(text); }, py::arg("text"));
  m.def("fold_flux", &fold_flux, py::arg("phi_ext"));

  py::class_<WelchResult>(m, "WelchResult")
      .def_readonly("t0", &WelchResult::t0)
      .def_readonly("nu", &WelchResult::nu)
      .def_readonly("p_value", &WelchResult::p_value)
      .def_readonly("ci_low", &WelchResult::ci_low)
      .def_readonly("ci_high", &WelchResult::ci_high)
      .def_readonly("alpha", &WelchResult::alpha)
      .def_readonly("mean1", &WelchResult::mean1)
      .def_readonly("mean2", &WelchResult::mean2);
  m.def("welch_t_test",
        [](const std::vector<double>& a, const std::vector<double>& b, double alpha) {
          return welch_t_test(a, b, alpha);
        },
        py::arg("sample1"), py::arg("sample2"), py::arg("alpha") = 0.05);
  m.def("t_pdf", &t_pdf, py::arg("t"), py::arg("nu"));
  m.def("critical_t", &critical_t, py::arg("alpha"), py::arg("nu"));

  m.def("run_cli",
        [](const std::vector<std::string>& args) {
          std::ostringstream out, err;
          int code = 0;
          {
            py::gil_scoped_release release;
            code = cli::run(args, out, err);
          }
          return std::make_tuple(code, out.str(), err.str());
        },
        py::arg("args"), "Runs the command-line interface in process; returns (exit_code, stdout, stderr).");
}
