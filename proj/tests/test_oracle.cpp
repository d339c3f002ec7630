#include <doctest.h>

#include <Eigen/SparseCore>
#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "omspec/errors.hpp"
#include "omspec/oracle.hpp"

using namespace omspec;
using cd = std::complex<double>;

namespace {

const SystemParams kParams{2.0, 0.1, 1.0};

// Flatten a wavefunction into the sparse-Hamiltonian basis ordering:
// cavity l at index l, outside (l, j) at index n_d + l*modes + j.
Eigen::VectorXcd flatten(const WavefunctionState& psi) {
  const int n_d = static_cast<int>(psi.cavity.size());
  const int modes = static_cast<int>(psi.outside.cols());
  Eigen::VectorXcd x(n_d + static_cast<long>(n_d) * modes);
  x.head(n_d) = psi.cavity;
  for (int l = 0; l < n_d; ++l) {
    x.segment(n_d + static_cast<long>(l) * modes, modes) =
        psi.outside.row(l).transpose();
  }
  return x;
}

WavefunctionState unflatten(const Eigen::VectorXcd& x, int n_d, int modes) {
  WavefunctionState psi;
  psi.cavity = x.head(n_d);
  psi.outside.resize(n_d, modes);
  for (int l = 0; l < n_d; ++l) {
    psi.outside.row(l) =
        x.segment(n_d + static_cast<long>(l) * modes, modes).transpose();
  }
  return psi;
}

Eigen::VectorXcd sparse_apply(const Eigen::SparseMatrix<double>& h,
                              const Eigen::VectorXcd& x) {
  return h * x.real() + cd(0.0, 1.0) * (h * x.imag());
}

double integral_on_grid(const Spectrum& s, double dk) {
  double sum = 0.0;
  for (const SpectrumPoint& p : s.points) sum += p.value * dk;
  return sum;
}

}  // namespace

TEST_CASE("discretization grid and validation") {
  const ContinuumDiscretization disc{16.0, 3200};
  CHECK(disc.dk() == doctest::Approx(0.01).epsilon(1e-15));
  const std::vector<double> g = disc.grid();
  REQUIRE(static_cast<int>(g.size()) == disc.modes);
  CHECK(g.front() == doctest::Approx(-16.0));
  CHECK(g[1] - g[0] == doctest::Approx(disc.dk()).epsilon(1e-12));
  CHECK_NOTHROW(disc.validate(kParams));
  // Band too narrow for the sideband comb.
  const ContinuumDiscretization narrow{8.0, 1600};
  CHECK_THROWS_AS(narrow.validate(kParams), InvalidInputError);
  // Mode spacing coarser than gamma_c / 10.
  const ContinuumDiscretization coarse{16.0, 320};
  CHECK_THROWS_AS(coarse.validate(kParams), InvalidInputError);
}

TEST_CASE("discretized Hamiltonian is symmetric") {
  const ContinuumDiscretization disc{14.0, 2800};
  const Eigen::SparseMatrix<double> h = build_hamiltonian(kParams, disc, 4);
  Eigen::SparseMatrix<double> ht = h.transpose();
  Eigen::SparseMatrix<double> diff = h - ht;
  double max_abs = 0.0;
  for (int k = 0; k < diff.outerSize(); ++k) {
    for (Eigen::SparseMatrix<double>::InnerIterator it(diff, k); it; ++it) {
      max_abs = std::max(max_abs, std::abs(it.value()));
    }
  }
  CHECK(max_abs < 1e-14);
}

TEST_CASE("cavity block spectrum is the polaron-shifted phonon ladder") {
  // Eigenvalues of omega_m b^dag b - g0 (b^dag + b) are l*omega_m - delta.
  const ContinuumDiscretization disc{14.0, 2800};
  const int n_d = 60;
  const Eigen::SparseMatrix<double> h = build_hamiltonian(kParams, disc, n_d);
  Eigen::MatrixXd block = Eigen::MatrixXd::Zero(n_d, n_d);
  for (int k = 0; k < n_d; ++k) {
    for (Eigen::SparseMatrix<double>::InnerIterator it(h, k); it; ++it) {
      if (it.row() < n_d) block(it.row(), k) = it.value();
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(block);
  const double delta = kParams.polaron_shift();
  for (int l = 0; l <= 5; ++l) {
    CHECK(es.eigenvalues()(l) ==
          doctest::Approx(l * kParams.omega_m - delta).epsilon(1e-6).scale(
              1.0));
  }
}

TEST_CASE("matrix-free application equals the sparse matrix") {
  const SystemParams p{2.0, 0.1, 1.0};
  OracleConfig cfg;
  cfg.disc = {14.0, 2800};
  cfg.n_d = 4;
  OracleEngine engine(p, cfg);
  const Eigen::SparseMatrix<double> h =
      build_hamiltonian(p, cfg.disc, cfg.n_d);
  const long dim = cfg.n_d + static_cast<long>(cfg.n_d) * cfg.disc.modes;
  Eigen::VectorXcd x(dim);
  for (long i = 0; i < dim; ++i) {
    x(i) = cd(std::sin(0.1 * i + 0.3), std::cos(0.07 * i));
  }
  x /= x.norm();
  const WavefunctionState psi = unflatten(x, cfg.n_d, cfg.disc.modes);
  const Eigen::VectorXcd got = flatten(engine.apply_hamiltonian(psi));
  const Eigen::VectorXcd want = sparse_apply(h, x);
  CHECK((got - want).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("uncoupled cavity decays at the Wigner-Weisskopf rate") {
  const SystemParams bare{0.0, 0.1, 1.0};
  for (double tg : {1.0, 3.0}) {
    OracleConfig cfg;
    cfg.disc = {16.0, 3200};
    cfg.n_d = 1;
    cfg.t_final_over_gamma = tg;
    OracleEngine engine(bare, cfg);
    EvolutionDiagnostics diag;
    engine.evolve(InitialCondition{}, &diag);
    CHECK(diag.cavity_population ==
          doctest::Approx(std::exp(-tg)).epsilon(0.02));
    CHECK(diag.norm_drift < 1e-8);
    CHECK(diag.energy_drift < 1e-8);
  }
}

TEST_CASE("oracle spectrum is linear in the distribution") {
  OracleConfig cfg;
  cfg.disc = {16.0, 3200};
  cfg.n_d = 24;
  OracleEngine engine(kParams, cfg);
  PhononDistribution p0 = PhononDistribution::Zero(2), p1 = p0, mix = p0;
  p0(0) = 1.0;
  p1(1) = 1.0;
  mix(0) = 0.3;
  mix(1) = 0.7;
  const Spectrum s0 = engine.spectrum(p0, PhotonVariant::Emission);
  const Spectrum s1 = engine.spectrum(p1, PhotonVariant::Emission);
  const Spectrum sm = engine.spectrum(mix, PhotonVariant::Emission);
  for (size_t i = 0; i < sm.points.size(); ++i) {
    CHECK(std::abs(sm.points[i].value - 0.3 * s0.points[i].value -
                   0.7 * s1.points[i].value) < 1e-10);
  }
  // Total emission lands in the outside modes.
  CHECK(integral_on_grid(s0, cfg.disc.dk()) ==
        doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("spectrum is converged in the mode count") {
  OracleConfig coarse;
  coarse.disc = {16.0, 3200};
  coarse.n_d = 24;
  OracleConfig fine = coarse;
  fine.disc.modes = 6400;
  OracleEngine a(kParams, coarse), b(kParams, fine);
  PhononDistribution vac = PhononDistribution::Zero(1);
  vac(0) = 1.0;
  const Spectrum sa = a.spectrum(vac, PhotonVariant::Emission);
  const Spectrum sb = b.spectrum(vac, PhotonVariant::Emission);
  double peak = 0.0;
  for (const SpectrumPoint& p : sb.points) peak = std::max(peak, p.value);
  for (double d = -8.0; d <= 4.0; d += 1.0) {
    const int ja = static_cast<int>(std::lround((d + 16.0) / 0.01));
    const int jb = static_cast<int>(std::lround((d + 16.0) / 0.005));
    REQUIRE(sa.points[ja].detuning == doctest::Approx(d).epsilon(1e-9));
    REQUIRE(sb.points[jb].detuning == doctest::Approx(d).epsilon(1e-9));
    CHECK(std::abs(sa.points[ja].value - sb.points[jb].value) <=
          0.01 * peak);
  }
}

TEST_CASE("scattering spectrum conserves the photon and peaks at the packet") {
  const SystemParams bare{0.0, 0.1, 1.0};
  OracleConfig cfg;
  cfg.disc = {16.0, 3200};
  cfg.n_d = 1;
  OracleEngine engine(bare, cfg);
  PhononDistribution vac = PhononDistribution::Zero(1);
  vac(0) = 1.0;
  const LorentzianPacket packet{0.0, 0.1};
  const Spectrum s = engine.spectrum(vac, PhotonVariant::Scattering, packet);
  CHECK(integral_on_grid(s, cfg.disc.dk()) ==
        doctest::Approx(1.0).epsilon(0.02));
  double best = 0.0, arg = -100.0;
  for (const SpectrumPoint& p : s.points) {
    if (p.value > best) {
      best = p.value;
      arg = p.detuning;
    }
  }
  CHECK(std::abs(arg - packet.center) <= 2.0 * packet.width);
}

TEST_CASE("Chebyshev propagator matches a Runge-Kutta reference") {
  const SystemParams bare{0.0, 0.1, 1.0};
  OracleConfig cfg;
  cfg.disc = {14.0, 2800};
  cfg.n_d = 1;
  InitialCondition init;
  init.variant = PhotonVariant::Scattering;
  init.packet = {0.0, 0.1};

  cfg.t_final_over_gamma = 1.0;
  OracleEngine early(bare, cfg);
  cfg.t_final_over_gamma = 3.0;
  OracleEngine late(bare, cfg);
  const Eigen::VectorXcd x0 = flatten(early.evolve(init));
  const Eigen::VectorXcd x1 = flatten(late.evolve(init));

  // RK4 from t = 10 to t = 30 on the sparse Hamiltonian.
  const Eigen::SparseMatrix<double> h =
      build_hamiltonian(bare, cfg.disc, cfg.n_d);
  const double dt = 0.01;
  const int steps = 2000;
  Eigen::VectorXcd y = x0;
  const cd mi(0.0, -1.0);
  for (int s = 0; s < steps; ++s) {
    const Eigen::VectorXcd k1 = mi * sparse_apply(h, y);
    const Eigen::VectorXcd k2 = mi * sparse_apply(h, y + 0.5 * dt * k1);
    const Eigen::VectorXcd k3 = mi * sparse_apply(h, y + 0.5 * dt * k2);
    const Eigen::VectorXcd k4 = mi * sparse_apply(h, y + dt * k3);
    y += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  CHECK((y - x1).cwiseAbs().maxCoeff() < 1e-4);
}

TEST_CASE("revival horizon is refused") {
  OracleConfig cfg;
  cfg.disc = {16.0, 3200};  // 2 pi / dk ~ 628
  cfg.n_d = 1;
  cfg.t_final_over_gamma = 70.0;  // t_final = 700
  const SystemParams bare{0.0, 0.1, 1.0};
  OracleEngine engine(bare, cfg);
  CHECK_THROWS_AS(engine.evolve(InitialCondition{}), OracleResourceError);
}

TEST_CASE("resource and input guards") {
  const ContinuumDiscretization disc{16.0, 3200};
  CHECK_THROWS_AS(build_hamiltonian(kParams, disc, 48, 1000),
                  OracleResourceError);
  OracleConfig cfg;
  cfg.disc = disc;
  cfg.n_d = 4;
  OracleEngine engine(kParams, cfg);
  InitialCondition init;
  init.mechanical_fock = 9;  // outside [0, n_d)
  CHECK_THROWS_AS(engine.evolve(init), InvalidInputError);
  init.mechanical_fock = 0;
  init.variant = PhotonVariant::Scattering;
  init.packet = {0.0, 0.01};  // narrower than 5 * dk
  CHECK_THROWS_AS(engine.evolve(init), InvalidInputError);
  init.packet = {15.0, 0.5};  // support leaves the band
  CHECK_THROWS_AS(engine.evolve(init), InvalidInputError);
  PhononDistribution toobig = PhononDistribution::Zero(5);
  toobig(0) = 1.0;
  CHECK_THROWS_AS(engine.spectrum(toobig, PhotonVariant::Emission),
                  InvalidInputError);
}

TEST_CASE("diagnostics report lists completed runs") {
  OracleConfig cfg;
  cfg.disc = {16.0, 3200};
  cfg.n_d = 1;
  cfg.t_final_over_gamma = 2.0;
  const SystemParams bare{0.0, 0.1, 1.0};
  OracleEngine engine(bare, cfg);
  PhononDistribution ground = PhononDistribution::Zero(1);
  ground(0) = 1.0;
  engine.spectrum(ground, PhotonVariant::Emission);
  const std::string report = engine.diagnostics_report();
  CHECK(report.find("runs = 1") != std::string::npos);
  CHECK(report.find("norm_drift") != std::string::npos);
  CHECK(report.find("revival_margin") != std::string::npos);
}
