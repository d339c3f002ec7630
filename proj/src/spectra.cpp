#include "omspec/spectra.hpp"

#include <cmath>
#include <numbers>

#include "omspec/errors.hpp"
#include "omspec/special.hpp"

namespace omspec {

namespace {
constexpr double kImagResidueTolerance = 1e-10;
}

SpectraEngine::SpectraEngine(const SystemParams& params, int n_d)
    : params_(params), n_d_(n_d) {
  params_.validate();
  if (n_d < 1) {
    throw InvalidInputError("SpectraEngine: n_d must be >= 1");
  }
  fc_fwd_ = franck_condon_table(n_d, n_d, params_.beta0());
  fc_bwd_ = franck_condon_table(n_d, n_d, -params_.beta0());
}

std::complex<double> SpectraEngine::emission_amplitude(int n0, int l,
                                                       double detuning) const {
  if (n0 < 0 || l < 0) {
    throw InvalidInputError("emission_amplitude: indices must be >= 0");
  }
  const double delta = params_.polaron_shift();
  const double half_gamma = params_.gamma_c / 2.0;
  const double coupling =
      std::sqrt(params_.gamma_c / (2.0 * std::numbers::pi));
  std::complex<double> sum = 0.0;
  for (int n = 0; n < n_d_; ++n) {
    const double overlap_out = (l < n_d_) ? fc_fwd_(l, n)
                                          : franck_condon(l, n, params_.beta0());
    const double overlap_in = (n0 < n_d_)
                                  ? fc_bwd_(n, n0)
                                  : franck_condon(n, n0, -params_.beta0());
    const std::complex<double> denom(
        detuning + delta - (n - l) * params_.omega_m, half_gamma);
    sum += overlap_out * overlap_in / denom;
  }
  return coupling * sum;
}

Eigen::MatrixXcd SpectraEngine::amplitude_matrix(double detuning,
                                                 int rows) const {
  if (rows < 1 || rows > n_d_) {
    throw InvalidInputError("amplitude_matrix: rows must be in [1, n_d]");
  }
  const double delta = params_.polaron_shift();
  const double half_gamma = params_.gamma_c / 2.0;
  const double coupling =
      std::sqrt(params_.gamma_c / (2.0 * std::numbers::pi));
  // weighted(n, l) = <l|n~> / (Delta + delta - (n-l) omega + i gamma/2)
  Eigen::MatrixXcd weighted(n_d_, n_d_);
  for (int l = 0; l < n_d_; ++l) {
    for (int n = 0; n < n_d_; ++n) {
      const std::complex<double> denom(
          detuning + delta - (n - l) * params_.omega_m, half_gamma);
      weighted(n, l) = fc_fwd_(l, n) / denom;
    }
  }
  // B(n0, l) = coupling * sum_n <n~|n0> weighted(n, l)
  return coupling * (fc_bwd_.leftCols(rows).transpose()
                         .cast<std::complex<double>>() * weighted);
}

std::complex<double> SpectraEngine::lambda_element(int n, int m,
                                                   double detuning) const {
  if (n < 0 || m < 0) {
    throw InvalidInputError("lambda_element: indices must be >= 0");
  }
  std::complex<double> sum = 0.0;
  for (int l = 0; l < n_d_; ++l) {
    sum += std::conj(emission_amplitude(n, l, detuning)) *
           emission_amplitude(m, l, detuning);
  }
  if (n == m) {
    sum = std::complex<double>(sum.real(), 0.0);  // sum of squared moduli
  }
  return sum;
}

Spectrum SpectraEngine::spectrum_fock(int n, std::span<const double> grid) const {
  if (grid.empty()) {
    throw InvalidInputError("spectrum_fock: empty grid");
  }
  PhononDistribution p = PhononDistribution::Zero(n + 1);
  p(n) = 1.0;
  return spectrum_emission(p, grid);
}

Spectrum SpectraEngine::spectrum_emission(const PhononDistribution& state,
                                          std::span<const double> grid) const {
  if (state.size() > n_d_) {
    throw InvalidInputError("spectrum_emission: state dimension exceeds n_d");
  }
  if (grid.empty()) {
    throw InvalidInputError("spectrum_emission: empty grid");
  }
  Spectrum out;
  out.points.reserve(grid.size());
  const int rows = static_cast<int>(state.size());
  for (double detuning : grid) {
    const Eigen::MatrixXcd b = amplitude_matrix(detuning, rows);
    const double value = (state.array() * b.rowwise().squaredNorm().array()).sum();
    out.points.push_back({detuning, value, -1.0});
  }
  return out;
}

Spectrum SpectraEngine::spectrum_emission(const DensityMatrix& state,
                                          std::span<const double> grid) const {
  if (state.rows() != state.cols()) {
    throw InvalidInputError("spectrum_emission: state must be square");
  }
  if (state.rows() > n_d_) {
    throw InvalidInputError("spectrum_emission: state dimension exceeds n_d");
  }
  if (grid.empty()) {
    throw InvalidInputError("spectrum_emission: empty grid");
  }
  Spectrum out;
  out.points.reserve(grid.size());
  const int rows = static_cast<int>(state.rows());
  for (double detuning : grid) {
    const Eigen::MatrixXcd b = amplitude_matrix(detuning, rows);
    // S = sum_{m,n} rho_{m,n} Lambda_{n,m} with Lambda_{n,m} = (B B^H)(m, n)
    const std::complex<double> value =
        (state.array() * (b * b.adjoint()).array()).sum();
    if (std::abs(value.imag()) >
        kImagResidueTolerance * std::max(std::abs(value.real()), 1e-300)) {
      throw InternalConsistencyError(
          "spectrum_emission: non-negligible imaginary residue; input not "
          "Hermitian");
    }
    out.points.push_back({detuning, value.real(), -1.0});
  }
  return out;
}

}  // namespace omspec
