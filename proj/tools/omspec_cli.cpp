// Command-line surface: synth / reconstruct / validate / scan / fidelity.
// Exit codes: 0 ok, 2 usage, 3 ill-posed, 4 non-converged, 5 I/O,
// 6 oracle-resource.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "omspec/errors.hpp"
#include "omspec/io.hpp"
#include "omspec/oracle.hpp"
#include "omspec/params.hpp"
#include "omspec/reconstruct.hpp"
#include "omspec/spectra.hpp"
#include "omspec/states.hpp"

namespace {

using json = nlohmann::json;
using namespace omspec;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitIllPosed = 3;
constexpr int kExitNonConverged = 4;
constexpr int kExitIo = 5;
constexpr int kExitOracleResource = 6;

struct PlanConfig {
  std::string strategy = "sideband";  // sideband | random | explicit
  std::vector<double> points;
  double range_low = -5.0;
  double range_high = 5.0;
  std::uint64_t seed = 0;
};

struct GridConfig {
  double min = -8.0;
  double max = 4.0;
  double step = 0.25;
};

struct RunConfig {
  SystemParams params;
  PhotonVariant variant = PhotonVariant::Emission;
  LorentzianPacket packet;
  std::optional<StateVariant> state;
  std::string state_description = "none";
  int n_d = 48;
  int big_n = 8;
  PlanConfig plan;
  bool has_plan = false;
  GridConfig grid;
  bool has_grid = false;
  std::string engine = "analytic";  // analytic | oracle
  OracleConfig oracle;
};

struct Overrides {
  std::optional<double> g0, gamma_c, omega_m, nbar;
  std::optional<int> n_d, big_n, fock;
  std::optional<std::string> engine;
  std::optional<std::uint64_t> seed;
};

RunConfig parse_config(const std::string& path, const Overrides& ov) {
  json cfg;
  if (!path.empty()) {
    try {
      cfg = json::parse(read_text_file(path));
    } catch (const json::exception& e) {
      throw IoError("config: " + path + ": " + e.what());
    }
  }
  RunConfig run;
  try {
    if (cfg.contains("system")) {
      const json& sys = cfg["system"];
      const bool ratios = sys.contains("g0_over_omega_m") ||
                          sys.contains("gamma_c_over_omega_m");
      const bool raw = sys.contains("g0") || sys.contains("gamma_c") ||
                       sys.contains("omega_m");
      if (ratios && raw) {
        throw InvalidInputError(
            "config field system: ratio and raw-frequency forms are mutually "
            "exclusive");
      }
      if (ratios) {
        run.params.omega_m = 1.0;
        run.params.g0 = sys.value("g0_over_omega_m", run.params.g0);
        run.params.gamma_c =
            sys.value("gamma_c_over_omega_m", run.params.gamma_c);
      } else {
        run.params.omega_m = sys.value("omega_m", run.params.omega_m);
        run.params.g0 = sys.value("g0", run.params.g0);
        run.params.gamma_c = sys.value("gamma_c", run.params.gamma_c);
      }
    }
    if (cfg.contains("variant")) {
      const std::string v = cfg["variant"].get<std::string>();
      if (v == "emission") {
        run.variant = PhotonVariant::Emission;
      } else if (v == "scattering") {
        run.variant = PhotonVariant::Scattering;
      } else {
        throw InvalidInputError("config field variant: unknown value " + v);
      }
    }
    if (cfg.contains("packet")) {
      run.packet.center = cfg["packet"].value("center", 0.0);
      run.packet.width = cfg["packet"].value("width", 0.0);
    }
    if (cfg.contains("state")) {
      const json& st = cfg["state"];
      int forms = 0;
      for (const char* key : {"thermal_nbar", "maximally_mixed_ns", "fock_n",
                              "superposition", "file"}) {
        if (st.contains(key)) ++forms;
      }
      if (forms != 1) {
        throw InvalidInputError(
            "config field state: exactly one specification required");
      }
      if (st.contains("thermal_nbar")) {
        const double nbar = st["thermal_nbar"].get<double>();
        const int levels = st.value("levels", 48);
        run.state = thermal_distribution(nbar, levels);
        run.state_description =
            "thermal nbar=" + std::to_string(nbar);
      } else if (st.contains("maximally_mixed_ns")) {
        const int ns = st["maximally_mixed_ns"].get<int>();
        const int levels = st.value("levels", ns);
        run.state = maximally_mixed(ns, levels);
        run.state_description = "maximally-mixed ns=" + std::to_string(ns);
      } else if (st.contains("fock_n")) {
        const int n = st["fock_n"].get<int>();
        if (n < 0) throw InvalidInputError("config field state.fock_n: < 0");
        PhononDistribution p = PhononDistribution::Zero(n + 1);
        p(n) = 1.0;
        run.state = p;
        run.state_description = "fock n=" + std::to_string(n);
      } else if (st.contains("superposition")) {
        const auto rows =
            st["superposition"].get<std::vector<std::vector<double>>>();
        Eigen::VectorXcd c(rows.size());
        for (size_t i = 0; i < rows.size(); ++i) {
          if (rows[i].size() != 2) {
            throw InvalidInputError(
                "config field state.superposition: entries are [re, im]");
          }
          c(i) = std::complex<double>(rows[i][0], rows[i][1]);
        }
        run.state = superposed_fock_density(c);
        run.state_description = "superposition";
      } else {
        const std::string file = st["file"].get<std::string>();
        run.state = read_state_file(file);
        run.state_description = "file " + file;
      }
    }
    if (cfg.contains("numerics")) {
      const json& num = cfg["numerics"];
      run.n_d = num.value("n_d", run.n_d);
      run.big_n = num.value("N", run.big_n);
      run.engine = num.value("engine", run.engine);
      if (num.contains("plan")) {
        const json& pl = num["plan"];
        run.has_plan = true;
        run.plan.strategy = pl.value("strategy", run.plan.strategy);
        if (pl.contains("points")) {
          run.plan.points = pl["points"].get<std::vector<double>>();
        }
        if (pl.contains("range")) {
          const auto r = pl["range"].get<std::vector<double>>();
          if (r.size() != 2) {
            throw InvalidInputError(
                "config field numerics.plan.range: need [low, high]");
          }
          run.plan.range_low = r[0];
          run.plan.range_high = r[1];
        }
        run.plan.seed = pl.value("seed", run.plan.seed);
      }
      if (num.contains("grid")) {
        const json& g = num["grid"];
        run.has_grid = true;
        run.grid.min = g.value("min", run.grid.min);
        run.grid.max = g.value("max", run.grid.max);
        run.grid.step = g.value("step", run.grid.step);
      }
      if (num.contains("oracle")) {
        const json& oc = num["oracle"];
        run.oracle.disc.window = oc.value("window", run.oracle.disc.window);
        run.oracle.disc.modes = oc.value("modes", run.oracle.disc.modes);
        run.oracle.t_final_over_gamma =
            oc.value("t_final_over_gamma", run.oracle.t_final_over_gamma);
        run.oracle.tol = oc.value("tol", run.oracle.tol);
      }
    }
  } catch (const json::exception& e) {
    throw InvalidInputError(std::string("config: ") + e.what());
  }

  // Flag overrides win over the config file.
  if (ov.g0) run.params.g0 = *ov.g0;
  if (ov.gamma_c) run.params.gamma_c = *ov.gamma_c;
  if (ov.omega_m) run.params.omega_m = *ov.omega_m;
  if (ov.n_d) run.n_d = *ov.n_d;
  if (ov.big_n) run.big_n = *ov.big_n;
  if (ov.engine) run.engine = *ov.engine;
  if (ov.seed) run.plan.seed = *ov.seed;
  if (ov.nbar) {
    run.state = thermal_distribution(*ov.nbar, 48);
    run.state_description = "thermal nbar=" + std::to_string(*ov.nbar);
  }
  if (ov.fock) {
    PhononDistribution p = PhononDistribution::Zero(*ov.fock + 1);
    p(*ov.fock) = 1.0;
    run.state = p;
    run.state_description = "fock n=" + std::to_string(*ov.fock);
  }
  run.params.validate();
  if (run.engine != "analytic" && run.engine != "oracle") {
    throw InvalidInputError("config field numerics.engine: unknown value " +
                            run.engine);
  }
  run.oracle.n_d = run.n_d;
  return run;
}

SamplePlan make_plan(const RunConfig& run, bool general) {
  if (run.has_plan && run.plan.strategy == "explicit") {
    SamplePlan plan = explicit_plan(run.plan.points);
    if (general) {
      const int n = static_cast<int>(
          std::lround(std::sqrt(double(plan.size()))));
      if (n * n != plan.size()) {
        throw InvalidInputError(
            "explicit general plan length must be a perfect square");
      }
    }
    return plan;
  }
  if (run.has_plan && run.plan.strategy == "random") {
    const int count = general ? run.big_n * run.big_n : run.big_n;
    return random_plan(count, run.plan.range_low, run.plan.range_high,
                       run.plan.seed, run.params);
  }
  if (!run.has_plan || run.plan.strategy == "sideband") {
    return general ? general_sideband_plan(run.big_n, run.params)
                   : sideband_plan(run.big_n, run.params);
  }
  throw InvalidInputError("config field numerics.plan.strategy: unknown value " +
                          run.plan.strategy);
}

std::vector<double> make_grid(const GridConfig& g) {
  if (!(g.step > 0.0) || !(g.min <= g.max)) {
    throw InvalidInputError("config field numerics.grid: need min <= max, step > 0");
  }
  std::vector<double> pts;
  const long count = std::lround((g.max - g.min) / g.step);
  for (long i = 0; i <= count; ++i) pts.push_back(g.min + i * g.step);
  return pts;
}

// Values of a full-grid oracle spectrum at requested detunings; every point
// must land on a discretization mode.
Eigen::VectorXd values_at_modes(const Spectrum& full,
                                const ContinuumDiscretization& disc,
                                const std::vector<double>& points) {
  Eigen::VectorXd out(points.size());
  for (size_t i = 0; i < points.size(); ++i) {
    const long j = std::lround((points[i] + disc.window) / disc.dk());
    if (j < 0 || j >= disc.modes ||
        std::abs(disc.mode_detuning(static_cast<int>(j)) - points[i]) > 1e-6) {
      throw InvalidInputError(
          "requested detuning " + std::to_string(points[i]) +
          " does not land on an oracle mode; adjust window/modes");
    }
    out(i) = full.points[static_cast<size_t>(j)].value;
  }
  return out;
}

Spectrum spectrum_for(const RunConfig& run, const StateVariant& state,
                      const std::vector<double>& points,
                      std::string* provenance,
                      const OracleEngine** engine_out = nullptr) {
  static std::optional<OracleEngine> oracle_engine;  // per-process reuse
  const bool use_oracle =
      run.engine == "oracle" || run.variant == PhotonVariant::Scattering;
  if (!use_oracle) {
    *provenance = "analytic";
    SpectraEngine engine(run.params, run.n_d);
    if (std::holds_alternative<PhononDistribution>(state)) {
      return engine.spectrum_emission(std::get<PhononDistribution>(state),
                                      points);
    }
    return engine.spectrum_emission(std::get<DensityMatrix>(state), points);
  }
  *provenance = "oracle";
  // Reuse the engine (and its amplitude cache) across calls with identical
  // configuration, e.g. the per-N spectra of a convergence scan.
  static std::tuple<double, double, double, double, int, int, double, double>
      engine_key;
  const auto key =
      std::make_tuple(run.params.g0, run.params.gamma_c, run.params.omega_m,
                      run.oracle.disc.window, run.oracle.disc.modes,
                      run.oracle.n_d, run.oracle.t_final_over_gamma,
                      run.oracle.tol);
  if (!oracle_engine.has_value() || key != engine_key) {
    oracle_engine.emplace(run.params, run.oracle);
    engine_key = key;
  }
  if (engine_out != nullptr) *engine_out = &*oracle_engine;
  Spectrum full;
  if (std::holds_alternative<PhononDistribution>(state)) {
    full = oracle_engine->spectrum(std::get<PhononDistribution>(state),
                                   run.variant, run.packet);
  } else {
    full = oracle_engine->spectrum(std::get<DensityMatrix>(state),
                                   run.variant, run.packet);
  }
  if (points.empty()) return full;  // full-grid request
  const Eigen::VectorXd vals =
      values_at_modes(full, run.oracle.disc, points);
  Spectrum out;
  for (size_t i = 0; i < points.size(); ++i) {
    out.points.push_back({points[i], vals(i), -1.0});
  }
  return out;
}

std::map<std::string, std::string> provenance_metadata(
    const RunConfig& run, const std::string& provenance) {
  std::map<std::string, std::string> md;
  auto num = [](double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
  };
  md["provenance"] = provenance;
  md["engine"] = run.engine;
  md["g0"] = num(run.params.g0);
  md["gamma_c"] = num(run.params.gamma_c);
  md["omega_m"] = num(run.params.omega_m);
  md["n_d"] = std::to_string(run.n_d);
  md["N"] = std::to_string(run.big_n);
  md["variant"] =
      run.variant == PhotonVariant::Emission ? "emission" : "scattering";
  if (run.variant == PhotonVariant::Scattering) {
    md["packet_center"] = num(run.packet.center);
    md["packet_width"] = num(run.packet.width);
  }
  md["state"] = run.state_description;
  if (run.has_plan) {
    md["plan_strategy"] = run.plan.strategy;
    md["plan_seed"] = std::to_string(run.plan.seed);
  }
  if (provenance == "oracle") {
    md["oracle_window"] = num(run.oracle.disc.window);
    md["oracle_modes"] = std::to_string(run.oracle.disc.modes);
    md["oracle_t_final_over_gamma"] = num(run.oracle.t_final_over_gamma);
    md["oracle_tol"] = num(run.oracle.tol);
  }
  return md;
}

json plan_to_json(const SamplePlan& plan) {
  json j;
  switch (plan.strategy) {
    case PlanStrategy::SidebandPeaks:
      j["strategy"] = "sideband";
      break;
    case PlanStrategy::RandomUniform:
      j["strategy"] = "random";
      break;
    case PlanStrategy::Explicit:
      j["strategy"] = "explicit";
      break;
  }
  j["points"] = plan.points;
  return j;
}

json params_to_json(const RunConfig& run) {
  json j;
  j["g0"] = run.params.g0;
  j["gamma_c"] = run.params.gamma_c;
  j["omega_m"] = run.params.omega_m;
  j["n_d"] = run.n_d;
  return j;
}

int cmd_synth(const RunConfig& run, const std::string& out_path) {
  if (!run.state.has_value()) {
    throw InvalidInputError("synth: config field state is required");
  }
  std::vector<double> points;
  const bool use_oracle =
      run.engine == "oracle" || run.variant == PhotonVariant::Scattering;
  if (run.has_plan) {
    points = make_plan(run, false).points;
    std::sort(points.begin(), points.end());
  } else if (run.has_grid) {
    points = make_grid(run.grid);
  } else if (!use_oracle) {
    throw InvalidInputError("synth: analytic engine needs a plan or a grid");
  }
  std::string provenance;
  const Spectrum spectrum = spectrum_for(run, *run.state, points, &provenance);
  write_spectrum_file(out_path, spectrum,
                      provenance_metadata(run, provenance));
  std::cout << "wrote " << out_path << " (" << spectrum.points.size()
            << " points, " << provenance << ")\n";
  return kExitOk;
}

// Observation values (and sigmas if present) at the plan points; every plan
// point must appear in the file exactly.
void extract_observations(const SpectrumFile& file, const SamplePlan& plan,
                          Eigen::VectorXd* values, Eigen::VectorXd* sigma) {
  const auto& pts = file.spectrum.points;
  const bool with_sigma = file.spectrum.has_sigma();
  values->resize(plan.size());
  if (with_sigma) sigma->resize(plan.size());
  std::vector<double> missing;
  for (int i = 0; i < plan.size(); ++i) {
    const double target = plan.points[i];
    const double tol = 1e-9 * std::max(1.0, std::abs(target));
    auto it = std::lower_bound(
        pts.begin(), pts.end(), target - tol,
        [](const SpectrumPoint& p, double v) { return p.detuning < v; });
    if (it == pts.end() || std::abs(it->detuning - target) > tol) {
      missing.push_back(target);
      continue;
    }
    (*values)(i) = it->value;
    if (with_sigma) (*sigma)(i) = it->sigma;
  }
  if (!missing.empty()) {
    std::ostringstream os;
    os << "reconstruct: spectrum file lacks plan detunings:";
    os.precision(10);
    for (double m : missing) os << " " << m;
    throw IoError(os.str());
  }
}

int cmd_reconstruct(const RunConfig& run, const std::string& spectrum_path,
                    const std::string& mode, const std::string& reference_path,
                    const std::string& out_path, bool project) {
  if (mode != "diagonal" && mode != "general") {
    throw InvalidInputError("reconstruct: mode must be diagonal or general");
  }
  const SpectrumFile file = read_spectrum_file(spectrum_path);
  const SamplePlan plan = make_plan(run, mode == "general");
  Eigen::VectorXd values, sigma;
  extract_observations(file, plan, &values, &sigma);

  json result;
  result["mode"] = mode;
  result["plan"] = plan_to_json(plan);
  result["params"] = params_to_json(run);
  result["spectrum_file"] = spectrum_path;

  if (mode == "diagonal") {
    const DiagonalProblem problem =
        build_diagonal_problem(plan, values, run.params, run.n_d, sigma);
    const DiagonalResult solved = solve_diagonal(problem);
    result["solution"] = std::vector<double>(
        solved.solution.data(),
        solved.solution.data() + solved.solution.size());
    result["condition_number"] = solved.condition_number;
    result["residual"] = solved.residual;
    if (!reference_path.empty()) {
      const StateVariant ref = read_state_file(reference_path);
      if (!std::holds_alternative<PhononDistribution>(ref)) {
        throw InvalidInputError(
            "reconstruct: diagonal reference must be a distribution");
      }
      const auto& r = std::get<PhononDistribution>(ref);
      const Eigen::Index n = std::max(r.size(), solved.solution.size());
      PhononDistribution a = PhononDistribution::Zero(n);
      PhononDistribution b = PhononDistribution::Zero(n);
      a.head(solved.solution.size()) = solved.solution;
      b.head(r.size()) = r;
      result["fidelity"] = fidelity_distribution(a, b);
    }
  } else {
    const GeneralProblem problem =
        build_general_problem(plan, values, run.params, run.n_d, sigma);
    GeneralResult solved = solve_general(problem);
    if (project) {
      solved.solution = project_to_physical(solved.solution);
      solved.projected = true;
    }
    std::vector<std::vector<double>> re, im;
    for (Eigen::Index r = 0; r < solved.solution.rows(); ++r) {
      std::vector<double> rr, ri;
      for (Eigen::Index c = 0; c < solved.solution.cols(); ++c) {
        rr.push_back(solved.solution(r, c).real());
        ri.push_back(solved.solution(r, c).imag());
      }
      re.push_back(rr);
      im.push_back(ri);
    }
    result["solution_re"] = re;
    result["solution_im"] = im;
    result["condition_number"] = solved.condition_number;
    result["residual"] = solved.residual;
    result["hermiticity_deviation"] = solved.hermiticity_deviation;
    result["trace"] = solved.trace;
    result["projected"] = solved.projected;
    if (!reference_path.empty()) {
      const StateVariant ref = read_state_file(reference_path);
      DensityMatrix refm;
      if (std::holds_alternative<DensityMatrix>(ref)) {
        refm = std::get<DensityMatrix>(ref);
      } else {
        const auto& p = std::get<PhononDistribution>(ref);
        refm = DensityMatrix::Zero(p.size(), p.size());
        for (Eigen::Index i = 0; i < p.size(); ++i) refm(i, i) = p(i);
      }
      const Eigen::Index n = std::max(refm.rows(), solved.solution.rows());
      DensityMatrix a = DensityMatrix::Zero(n, n);
      DensityMatrix b = DensityMatrix::Zero(n, n);
      a.topLeftCorner(solved.solution.rows(), solved.solution.cols()) =
          solved.solution;
      b.topLeftCorner(refm.rows(), refm.cols()) = refm;
      result["fidelity"] = fidelity_density(a, b);
    }
  }
  const std::string text = result.dump(2) + "\n";
  if (out_path.empty()) {
    std::cout << text;
  } else {
    write_text_file(out_path, text);
    std::cout << "wrote " << out_path << "\n";
  }
  return kExitOk;
}

int cmd_validate(const RunConfig& run, double threshold,
                 const std::string& out_path) {
  if (run.variant != PhotonVariant::Emission) {
    throw InvalidInputError("validate: emission variant required");
  }
  StateVariant state;
  if (run.state.has_value()) {
    state = *run.state;
  } else {
    state = PhononDistribution(PhononDistribution::Ones(1));
  }
  const std::vector<double> points = make_grid(run.grid);

  SpectraEngine engine(run.params, run.n_d);
  Spectrum analytic;
  if (std::holds_alternative<PhononDistribution>(state)) {
    analytic = engine.spectrum_emission(std::get<PhononDistribution>(state),
                                        points);
  } else {
    analytic =
        engine.spectrum_emission(std::get<DensityMatrix>(state), points);
  }

  OracleEngine oracle(run.params, run.oracle);
  Spectrum full;
  if (std::holds_alternative<PhononDistribution>(state)) {
    full = oracle.spectrum(std::get<PhononDistribution>(state),
                           PhotonVariant::Emission);
  } else {
    full = oracle.spectrum(std::get<DensityMatrix>(state),
                           PhotonVariant::Emission);
  }
  const Eigen::VectorXd ov = values_at_modes(full, run.oracle.disc, points);

  double linf = 0.0, abs_sum = 0.0, ref_sum = 0.0;
  for (size_t i = 0; i < points.size(); ++i) {
    const double a = analytic.points[i].value;
    const double o = ov(i);
    if (a > 0.0) linf = std::max(linf, std::abs(o - a) / a);
    abs_sum += std::abs(o - a);
    ref_sum += std::abs(a);
  }
  const double l1 = ref_sum > 0.0 ? abs_sum / ref_sum : 0.0;
  const bool pass = linf <= threshold;

  std::ostringstream os;
  os.precision(6);
  os << "linf_relative = " << linf << "\n";
  os << "l1_relative = " << l1 << "\n";
  os << "threshold = " << threshold << "\n";
  os << "pass = " << (pass ? "true" : "false") << "\n";
  os << "grid_points = " << points.size() << "\n";
  os << oracle.diagnostics_report();
  std::cout << os.str();
  if (!out_path.empty()) write_text_file(out_path, os.str());
  return kExitOk;
}

int cmd_scan(const RunConfig& run, int n_min, int n_max, double tol,
             const std::string& out_path) {
  if (!run.state.has_value() ||
      !std::holds_alternative<PhononDistribution>(*run.state)) {
    throw InvalidInputError("scan: a diagonal (distribution) state is required");
  }
  const PhononDistribution& exact = std::get<PhononDistribution>(*run.state);

  auto provider = [&](const SamplePlan& plan) -> Eigen::VectorXd {
    std::string provenance;
    const Spectrum s = spectrum_for(run, *run.state, plan.points, &provenance);
    Eigen::VectorXd v(s.points.size());
    for (size_t i = 0; i < s.points.size(); ++i) v(i) = s.points[i].value;
    return v;
  };

  ScanConfig scan_cfg;
  scan_cfg.tol = tol;
  if (run.has_plan && run.plan.strategy == "random") {
    scan_cfg.strategy = PlanStrategy::RandomUniform;
    scan_cfg.range_low = run.plan.range_low;
    scan_cfg.range_high = run.plan.range_high;
    scan_cfg.seed = run.plan.seed;
  }
  const ScanResult result =
      convergence_scan(provider, run.params, run.n_d, n_min, n_max, scan_cfg);

  std::ostringstream os;
  os.precision(10);
  os << "# omspec-scan v1\n";
  for (const auto& [k, v] : provenance_metadata(run, run.engine)) {
    os << "# " << k << " = " << v << "\n";
  }
  os << "# tol = " << tol << "\n";
  os << "# columns = N converged l1_step fidelity condition residual P...\n";
  for (size_t i = 0; i < result.history.size(); ++i) {
    const ScanEntry& e = result.history[i];
    const bool flag = i + 2 < result.history.size() &&
                      result.history[i + 1].l1_step >= 0.0 &&
                      result.history[i + 1].l1_step < tol &&
                      result.history[i + 2].l1_step < tol;
    const Eigen::Index n = std::max<Eigen::Index>(exact.size(), e.solution.size());
    PhononDistribution a = PhononDistribution::Zero(n);
    PhononDistribution b = PhononDistribution::Zero(n);
    a.head(e.solution.size()) = e.solution;
    b.head(exact.size()) = exact;
    os << e.truncation << " " << (flag ? 1 : 0) << " " << e.l1_step << " "
       << fidelity_distribution(a, b) << " " << e.condition_number << " "
       << e.residual;
    for (Eigen::Index k = 0; k < e.solution.size(); ++k) {
      os << " " << e.solution(k);
    }
    os << "\n";
  }
  if (out_path.empty()) {
    std::cout << os.str();
  } else {
    write_text_file(out_path, os.str());
  }
  if (result.converged) {
    std::cout << "converged_n = " << result.converged_n << "\n";
    return kExitOk;
  }
  std::cout << "converged_n = none\n";
  return kExitNonConverged;
}

int cmd_fidelity(const std::string& a_path, const std::string& b_path) {
  const StateVariant a = read_state_file(a_path);
  const StateVariant b = read_state_file(b_path);
  double f = 0.0;
  if (std::holds_alternative<PhononDistribution>(a) &&
      std::holds_alternative<PhononDistribution>(b)) {
    const auto& pa = std::get<PhononDistribution>(a);
    const auto& pb = std::get<PhononDistribution>(b);
    const Eigen::Index n = std::max(pa.size(), pb.size());
    PhononDistribution xa = PhononDistribution::Zero(n);
    PhononDistribution xb = PhononDistribution::Zero(n);
    xa.head(pa.size()) = pa;
    xb.head(pb.size()) = pb;
    f = fidelity_distribution(xa, xb);
  } else {
    auto densify = [](const StateVariant& s) -> DensityMatrix {
      if (std::holds_alternative<DensityMatrix>(s)) {
        return std::get<DensityMatrix>(s);
      }
      const auto& p = std::get<PhononDistribution>(s);
      DensityMatrix d = DensityMatrix::Zero(p.size(), p.size());
      for (Eigen::Index i = 0; i < p.size(); ++i) d(i, i) = p(i);
      return d;
    };
    DensityMatrix da = densify(a), db = densify(b);
    const Eigen::Index n = std::max(da.rows(), db.rows());
    DensityMatrix xa = DensityMatrix::Zero(n, n);
    DensityMatrix xb = DensityMatrix::Zero(n, n);
    xa.topLeftCorner(da.rows(), da.cols()) = da;
    xb.topLeftCorner(db.rows(), db.cols()) = db;
    f = fidelity_density(xa, xb);
  }
  std::cout.precision(10);
  std::cout << "fidelity = " << f << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Single-photon optomechanical spectra and mechanical-state "
               "reconstruction"};
  app.require_subcommand(1);

  std::string config_path, out_path, spectrum_path, mode = "diagonal";
  std::string reference_path, a_path, b_path;
  double threshold = 0.03, scan_tol = 1e-3;
  int n_min = 1, n_max = 10;
  bool project = false;
  Overrides ov;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "JSON run configuration");
    sub->add_option("--g0", ov.g0, "override g0");
    sub->add_option("--gamma-c", ov.gamma_c, "override gamma_c");
    sub->add_option("--omega-m", ov.omega_m, "override omega_m");
    sub->add_option("--n-d", ov.n_d, "override summation dimension n_d");
    sub->add_option("--N", ov.big_n, "override truncation N");
    sub->add_option("--engine", ov.engine, "override engine: analytic|oracle");
    sub->add_option("--seed", ov.seed, "override plan seed");
    sub->add_option("--nbar", ov.nbar, "override state: thermal nbar");
    sub->add_option("--fock", ov.fock, "override state: Fock n");
  };

  CLI::App* synth = app.add_subcommand("synth", "synthesize a spectrum file");
  add_common(synth);
  synth->add_option("--out", out_path, "output spectrum file")->required();

  CLI::App* rec =
      app.add_subcommand("reconstruct", "invert a spectrum file to a state");
  add_common(rec);
  rec->add_option("--spectrum", spectrum_path, "input spectrum file")
      ->required();
  rec->add_option("--mode", mode, "diagonal|general");
  rec->add_option("--reference", reference_path,
                  "reference state file for fidelity");
  rec->add_option("--out", out_path, "output result JSON (default stdout)");
  rec->add_flag("--project", project,
                "project the general solution to a physical density matrix");

  CLI::App* val =
      app.add_subcommand("validate", "oracle vs analytic cross-check");
  add_common(val);
  val->add_option("--threshold", threshold, "pass threshold on Linf relative");
  val->add_option("--out", out_path, "also write the report here");

  CLI::App* scan =
      app.add_subcommand("scan", "step-up truncation convergence scan");
  add_common(scan);
  scan->add_option("--n-min", n_min, "first truncation N");
  scan->add_option("--n-max", n_max, "last truncation N");
  scan->add_option("--tol", scan_tol, "L1 convergence tolerance");
  scan->add_option("--out", out_path, "history file (default stdout)");

  CLI::App* fid = app.add_subcommand("fidelity", "fidelity of two state files");
  fid->add_option("--a", a_path, "first state file")->required();
  fid->add_option("--b", b_path, "second state file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (fid->parsed()) return cmd_fidelity(a_path, b_path);
    const RunConfig run = parse_config(config_path, ov);
    if (synth->parsed()) return cmd_synth(run, out_path);
    if (rec->parsed()) {
      return cmd_reconstruct(run, spectrum_path, mode, reference_path,
                             out_path, project);
    }
    if (val->parsed()) return cmd_validate(run, threshold, out_path);
    if (scan->parsed()) return cmd_scan(run, n_min, n_max, scan_tol, out_path);
  } catch (const IllPosedError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIllPosed;
  } catch (const OracleResourceError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitOracleResource;
  } catch (const IntegratorFailureError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNonConverged;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const InvalidInputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return kExitUsage;
}
