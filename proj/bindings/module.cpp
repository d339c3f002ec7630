#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "omspec/errors.hpp"
#include "omspec/oracle.hpp"
#include "omspec/params.hpp"
#include "omspec/reconstruct.hpp"
#include "omspec/special.hpp"
#include "omspec/spectra.hpp"
#include "omspec/states.hpp"

namespace py = pybind11;
using namespace omspec;

namespace {

Eigen::VectorXd spectrum_detunings(const Spectrum& s) {
  Eigen::VectorXd d(s.points.size());
  for (size_t i = 0; i < s.points.size(); ++i) d(i) = s.points[i].detuning;
  return d;
}

Eigen::VectorXd spectrum_values(const Spectrum& s) {
  Eigen::VectorXd v(s.points.size());
  for (size_t i = 0; i < s.points.size(); ++i) v(i) = s.points[i].value;
  return v;
}

}  // namespace

PYBIND11_MODULE(_omspec, m) {
  m.doc() = "Single-photon optomechanical spectra and state reconstruction";

  py::register_exception<InvalidInputError>(m, "InvalidInputError",
                                            PyExc_ValueError);
  py::register_exception<IllPosedError>(m, "IllPosedError");
  py::register_exception<OracleResourceError>(m, "OracleResourceError");
  py::register_exception<IntegratorFailureError>(m, "IntegratorFailureError");
  py::register_exception<IoError>(m, "IoError", PyExc_IOError);

  py::class_<SystemParams>(m, "SystemParams")
      .def(py::init([](double g0, double gamma_c, double omega_m) {
             SystemParams p{g0, gamma_c, omega_m};
             p.validate();
             return p;
           }),
           py::arg("g0"), py::arg("gamma_c") = 0.1, py::arg("omega_m") = 1.0)
      .def_readwrite("g0", &SystemParams::g0)
      .def_readwrite("gamma_c", &SystemParams::gamma_c)
      .def_readwrite("omega_m", &SystemParams::omega_m)
      .def_property_readonly("beta0", &SystemParams::beta0)
      .def_property_readonly("polaron_shift", &SystemParams::polaron_shift);

  py::class_<LorentzianPacket>(m, "LorentzianPacket")
      .def(py::init([](double center, double width) {
             LorentzianPacket p{center, width};
             p.validate();
             return p;
           }),
           py::arg("center"), py::arg("width"))
      .def_readwrite("center", &LorentzianPacket::center)
      .def_readwrite("width", &LorentzianPacket::width);

  py::class_<Spectrum>(m, "Spectrum")
      .def_property_readonly("detunings", &spectrum_detunings)
      .def_property_readonly("values", &spectrum_values)
      .def("__len__", [](const Spectrum& s) { return s.points.size(); });

  m.def("franck_condon", &franck_condon, py::arg("m"), py::arg("n"),
        py::arg("beta"));
  m.def("thermal_distribution", &thermal_distribution, py::arg("nbar"),
        py::arg("n"));
  m.def("maximally_mixed", &maximally_mixed, py::arg("n_s"), py::arg("n"));
  m.def("superposed_fock_density", &superposed_fock_density,
        py::arg("coefficients"));
  m.def("fidelity_distribution", &fidelity_distribution, py::arg("p"),
        py::arg("q"));
  m.def("fidelity_density", &fidelity_density, py::arg("rho"),
        py::arg("sigma"));

  py::class_<SpectraEngine>(m, "SpectraEngine")
      .def(py::init<const SystemParams&, int>(), py::arg("params"),
           py::arg("n_d"))
      .def("emission_amplitude", &SpectraEngine::emission_amplitude,
           py::arg("n0"), py::arg("l"), py::arg("detuning"))
      .def("lambda_element", &SpectraEngine::lambda_element, py::arg("n"),
           py::arg("m"), py::arg("detuning"))
      .def("amplitude_matrix", &SpectraEngine::amplitude_matrix,
           py::arg("detuning"), py::arg("rows"))
      .def("spectrum_fock",
           [](const SpectraEngine& e, int n, const std::vector<double>& grid) {
             return e.spectrum_fock(n, grid);
           },
           py::arg("n"), py::arg("grid"))
      .def("spectrum_emission",
           [](const SpectraEngine& e, const PhononDistribution& p,
              const std::vector<double>& grid) {
             return e.spectrum_emission(p, grid);
           },
           py::arg("state"), py::arg("grid"))
      .def("spectrum_emission_density",
           [](const SpectraEngine& e, const DensityMatrix& rho,
              const std::vector<double>& grid) {
             return e.spectrum_emission(rho, grid);
           },
           py::arg("state"), py::arg("grid"));

  py::enum_<PlanStrategy>(m, "PlanStrategy")
      .value("SidebandPeaks", PlanStrategy::SidebandPeaks)
      .value("RandomUniform", PlanStrategy::RandomUniform)
      .value("Explicit", PlanStrategy::Explicit);

  py::class_<SamplePlan>(m, "SamplePlan")
      .def_readonly("points", &SamplePlan::points)
      .def_readonly("strategy", &SamplePlan::strategy)
      .def("__len__", &SamplePlan::size);

  m.def("sideband_plan", &sideband_plan, py::arg("n"), py::arg("params"));
  m.def("general_sideband_plan", &general_sideband_plan, py::arg("n"),
        py::arg("params"));
  m.def("random_plan", &random_plan, py::arg("n"), py::arg("low"),
        py::arg("high"), py::arg("seed"), py::arg("params"));
  m.def("explicit_plan", &explicit_plan, py::arg("points"));

  py::class_<DiagonalProblem>(m, "DiagonalProblem")
      .def_readonly("k", &DiagonalProblem::k)
      .def_readonly("q", &DiagonalProblem::q)
      .def_readonly("truncation", &DiagonalProblem::truncation);
  py::class_<GeneralProblem>(m, "GeneralProblem")
      .def_readonly("m", &GeneralProblem::m)
      .def_readonly("r", &GeneralProblem::r)
      .def_readonly("truncation", &GeneralProblem::truncation);
  py::class_<DiagonalResult>(m, "DiagonalResult")
      .def_readonly("solution", &DiagonalResult::solution)
      .def_readonly("condition_number", &DiagonalResult::condition_number)
      .def_readonly("residual", &DiagonalResult::residual);
  py::class_<GeneralResult>(m, "GeneralResult")
      .def_readonly("solution", &GeneralResult::solution)
      .def_readonly("condition_number", &GeneralResult::condition_number)
      .def_readonly("residual", &GeneralResult::residual)
      .def_readonly("hermiticity_deviation",
                    &GeneralResult::hermiticity_deviation)
      .def_readonly("trace", &GeneralResult::trace);

  m.def("build_diagonal_problem", &build_diagonal_problem, py::arg("plan"),
        py::arg("spectrum_values"), py::arg("params"), py::arg("n_d"),
        py::arg("sigma") = Eigen::VectorXd());
  m.def("solve_diagonal", &solve_diagonal, py::arg("problem"),
        py::arg("condition_cap") = kConditionCap);
  m.def("build_general_problem", &build_general_problem, py::arg("plan"),
        py::arg("spectrum_values"), py::arg("params"), py::arg("n_d"),
        py::arg("sigma") = Eigen::VectorXd());
  m.def("solve_general", &solve_general, py::arg("problem"),
        py::arg("condition_cap") = kConditionCap);
  m.def("project_to_physical", &project_to_physical, py::arg("rho"));

  py::enum_<PhotonVariant>(m, "PhotonVariant")
      .value("Emission", PhotonVariant::Emission)
      .value("Scattering", PhotonVariant::Scattering);

  py::class_<ContinuumDiscretization>(m, "ContinuumDiscretization")
      .def(py::init([](double window, int modes) {
             return ContinuumDiscretization{window, modes};
           }),
           py::arg("window") = 60.0, py::arg("modes") = 12000)
      .def_readwrite("window", &ContinuumDiscretization::window)
      .def_readwrite("modes", &ContinuumDiscretization::modes)
      .def_property_readonly("dk", &ContinuumDiscretization::dk);

  py::class_<OracleConfig>(m, "OracleConfig")
      .def(py::init([](const ContinuumDiscretization& disc, int n_d,
                       double t_final_over_gamma, double tol) {
             OracleConfig c;
             c.disc = disc;
             c.n_d = n_d;
             c.t_final_over_gamma = t_final_over_gamma;
             c.tol = tol;
             return c;
           }),
           py::arg("disc") = ContinuumDiscretization{},
           py::arg("n_d") = 48, py::arg("t_final_over_gamma") = 15.0,
           py::arg("tol") = 1e-9)
      .def_readwrite("disc", &OracleConfig::disc)
      .def_readwrite("n_d", &OracleConfig::n_d)
      .def_readwrite("t_final_over_gamma", &OracleConfig::t_final_over_gamma)
      .def_readwrite("tol", &OracleConfig::tol);

  py::class_<OracleEngine>(m, "OracleEngine")
      .def(py::init<const SystemParams&, const OracleConfig&>(),
           py::arg("params"), py::arg("config"))
      .def("spectrum",
           [](const OracleEngine& e, const PhononDistribution& p,
              PhotonVariant v, const LorentzianPacket& packet) {
             return e.spectrum(p, v, packet);
           },
           py::arg("state"), py::arg("variant") = PhotonVariant::Emission,
           py::arg("packet") = LorentzianPacket{})
      .def("spectrum_density",
           [](const OracleEngine& e, const DensityMatrix& rho,
              PhotonVariant v, const LorentzianPacket& packet) {
             return e.spectrum(rho, v, packet);
           },
           py::arg("state"), py::arg("variant") = PhotonVariant::Emission,
           py::arg("packet") = LorentzianPacket{})
      .def("grid", &OracleEngine::grid)
      .def("diagnostics_report", &OracleEngine::diagnostics_report);

  py::class_<ScanEntry>(m, "ScanEntry")
      .def_readonly("truncation", &ScanEntry::truncation)
      .def_readonly("solution", &ScanEntry::solution)
      .def_readonly("condition_number", &ScanEntry::condition_number)
      .def_readonly("residual", &ScanEntry::residual)
      .def_readonly("l1_step", &ScanEntry::l1_step);
  py::class_<ScanResult>(m, "ScanResult")
      .def_readonly("converged", &ScanResult::converged)
      .def_readonly("converged_n", &ScanResult::converged_n)
      .def_readonly("history", &ScanResult::history);

  m.def("convergence_scan",
        [](const std::function<Eigen::VectorXd(const SamplePlan&)>& provider,
           const SystemParams& params, int n_d, int n_min, int n_max,
           double tol) {
          ScanConfig cfg;
          cfg.tol = tol;
          return convergence_scan(provider, params, n_d, n_min, n_max, cfg);
        },
        py::arg("values_for_plan"), py::arg("params"), py::arg("n_d"),
        py::arg("n_min"), py::arg("n_max"), py::arg("tol") = 1e-3);
}
