#include <doctest.h>

#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "omspec/errors.hpp"
#include "omspec/spectra.hpp"
#include "omspec/states.hpp"

using namespace omspec;
using cd = std::complex<double>;

namespace {
const SystemParams kParams{2.0, 0.1, 1.0};
}

TEST_CASE("zero coupling gives the bare Wigner-Weisskopf Lorentzian") {
  const SystemParams p{0.0, 0.1, 1.0};
  SpectraEngine engine(p, 8);
  const std::vector<double> grid{-2.0, -0.5, 0.0, 0.3, 1.7};
  const Spectrum s = engine.spectrum_fock(0, grid);
  for (size_t i = 0; i < grid.size(); ++i) {
    const double d = grid[i];
    const double expected = (p.gamma_c / (2.0 * std::numbers::pi)) /
                            (d * d + p.gamma_c * p.gamma_c / 4.0);
    CHECK(s.points[i].value == doctest::Approx(expected).epsilon(1e-12));
  }
}

TEST_CASE("printed sample value of the diagonal kernel") {
  // S_{|0>}(Delta = -0.238903) = 1.47341e-2 at g0 = 2, gamma_c = 0.1,
  // n_d = 48 (printed to six digits).
  SpectraEngine engine(kParams, 48);
  const Spectrum s = engine.spectrum_fock(0, std::vector<double>{-0.238903});
  CHECK(s.points[0].value == doctest::Approx(1.47341e-2).epsilon(2e-5));
}

TEST_CASE("printed spectrum of the three-level superposition") {
  // S at Delta = -8..0 for (|0> + i|1> - |2>)/sqrt(3), units 1e-1.
  const double expected[9] = {2.85246e-1, 2.62496e-1, 2.87073e-1,
                              2.95110e-1, 2.80948e-1, 2.85702e-1,
                              2.90594e-1, 3.17267e-1, 3.24202e-1};
  Eigen::VectorXcd c(3);
  c << cd(1, 0), cd(0, 1), cd(-1, 0);
  const DensityMatrix rho = superposed_fock_density(c);
  SpectraEngine engine(kParams, 48);
  std::vector<double> grid;
  for (int j = -8; j <= 0; ++j) grid.push_back(j);
  const Spectrum s = engine.spectrum_emission(rho, grid);
  for (int i = 0; i < 9; ++i) {
    CHECK(s.points[i].value == doctest::Approx(expected[i]).epsilon(1e-4));
  }
}

TEST_CASE("Lambda conjugate symmetry and real non-negative diagonal") {
  SpectraEngine engine(kParams, 32);
  for (double d : {-4.0, -1.3, 0.0, 2.6}) {
    for (int n = 0; n <= 4; ++n) {
      for (int m = 0; m <= 4; ++m) {
        const cd lnm = engine.lambda_element(n, m, d);
        const cd lmn = engine.lambda_element(m, n, d);
        CHECK(std::abs(lnm - std::conj(lmn)) < 1e-15);
      }
      const cd diag = engine.lambda_element(n, n, d);
      CHECK(diag.imag() == 0.0);
      CHECK(diag.real() >= 0.0);
    }
  }
}

TEST_CASE("amplitude matrix agrees with scalar amplitudes") {
  SpectraEngine engine(kParams, 24);
  const Eigen::MatrixXcd b = engine.amplitude_matrix(-3.7, 5);
  for (int n0 = 0; n0 < 5; ++n0) {
    for (int l = 0; l < 24; ++l) {
      CHECK(std::abs(b(n0, l) - engine.emission_amplitude(n0, l, -3.7)) <
            1e-15);
    }
  }
}

TEST_CASE("spectrum is linear in the state") {
  SpectraEngine engine(kParams, 32);
  const std::vector<double> grid{-5.0, -4.0, -2.5, 0.0};
  PhononDistribution p0 = PhononDistribution::Zero(3), p1 = p0, mix = p0;
  p0(0) = 1.0;
  p1(1) = 1.0;
  mix(0) = 0.3;
  mix(1) = 0.7;
  const Spectrum s0 = engine.spectrum_emission(p0, grid);
  const Spectrum s1 = engine.spectrum_emission(p1, grid);
  const Spectrum sm = engine.spectrum_emission(mix, grid);
  for (size_t i = 0; i < grid.size(); ++i) {
    CHECK(sm.points[i].value ==
          doctest::Approx(0.3 * s0.points[i].value + 0.7 * s1.points[i].value)
              .epsilon(1e-12));
  }
}

TEST_CASE("density and distribution spectra agree for diagonal states") {
  SpectraEngine engine(kParams, 32);
  const std::vector<double> grid{-4.0, -1.0, 1.0};
  PhononDistribution p(3);
  p << 0.5, 0.3, 0.2;
  DensityMatrix rho = DensityMatrix::Zero(3, 3);
  for (int i = 0; i < 3; ++i) rho(i, i) = p(i);
  const Spectrum sd = engine.spectrum_emission(p, grid);
  const Spectrum sr = engine.spectrum_emission(rho, grid);
  for (size_t i = 0; i < grid.size(); ++i) {
    CHECK(sr.points[i].value ==
          doctest::Approx(sd.points[i].value).epsilon(1e-12));
  }
}

TEST_CASE("summation dimension is converged at n_d = 48") {
  SpectraEngine e48(kParams, 48);
  SpectraEngine e64(kParams, 64);
  std::vector<double> grid;
  for (double d = -8.0; d <= 4.0; d += 0.5) grid.push_back(d);
  const Spectrum a = e48.spectrum_fock(2, grid);
  const Spectrum b = e64.spectrum_fock(2, grid);
  for (size_t i = 0; i < grid.size(); ++i) {
    CHECK(std::abs(a.points[i].value - b.points[i].value) <
          1e-8 * b.points[i].value);
  }
}

TEST_CASE("total emission probability integrates to one") {
  // Integral of S over all detunings is the photon norm; a wide trapezoid
  // over the sideband comb captures it up to far-tail Lorentzian leakage.
  SpectraEngine engine(kParams, 48);
  std::vector<double> grid;
  const double step = 0.02;
  for (double d = -60.0; d <= 60.0; d += step) grid.push_back(d);
  const Spectrum s = engine.spectrum_fock(0, grid);
  double integral = 0.0;
  for (size_t i = 1; i < s.points.size(); ++i) {
    integral +=
        0.5 * (s.points[i].value + s.points[i - 1].value) * step;
  }
  CHECK(integral == doctest::Approx(1.0).epsilon(2e-3));
}

TEST_CASE("invalid spectra inputs throw") {
  SpectraEngine engine(kParams, 8);
  CHECK_THROWS_AS(SpectraEngine(kParams, 0), InvalidInputError);
  CHECK_THROWS_AS(engine.emission_amplitude(-1, 0, 0.0), InvalidInputError);
  CHECK_THROWS_AS(engine.spectrum_fock(0, std::vector<double>{}),
                  InvalidInputError);
  const PhononDistribution oversized = PhononDistribution::Ones(9);
  CHECK_THROWS_AS(
      engine.spectrum_emission(oversized, std::vector<double>{0.0}),
      InvalidInputError);
  DensityMatrix rect(2, 3);
  rect.setZero();
  CHECK_THROWS_AS(engine.spectrum_emission(rect, std::vector<double>{0.0}),
                  InvalidInputError);
}
