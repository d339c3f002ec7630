#ifndef OMSPEC_SPECTRA_HPP
#define OMSPEC_SPECTRA_HPP

#include <Eigen/Dense>
#include <complex>
#include <span>
#include <vector>

#include "omspec/params.hpp"
#include "omspec/states.hpp"

namespace omspec {

/// Closed-form single-photon emission amplitudes and spectra.
///
/// All amplitudes are long-time limits under the flat-coupling treatment of
/// the cavity-continuum interaction, with the summation over displaced-basis
/// eigenstates truncated at n_d. The time-dependent global phase of the
/// amplitude is dropped: every downstream quantity pairs an amplitude with a
/// conjugate at the same final phonon number and detuning, where it cancels
/// identically.
class SpectraEngine {
 public:
  SpectraEngine(const SystemParams& params, int n_d);

  /// B_{n0,l}(Delta_k): amplitude for the photon to end at detuning Delta_k
  /// with the mirror in |l>, starting from the photon in the cavity and the
  /// mirror in |n0>.
  std::complex<double> emission_amplitude(int n0, int l,
                                          double detuning) const;

  /// Overlap kernel Lambda_{n,m}(Delta_k) = sum_l B*_{n,l} B_{m,l}, with the
  /// l sum truncated at n_d like the eigenstate sum.
  std::complex<double> lambda_element(int n, int m, double detuning) const;

  /// S_{|n>}(Delta_k) = Lambda_{n,n}(Delta_k) on the supplied grid.
  Spectrum spectrum_fock(int n, std::span<const double> grid) const;

  /// Emission spectrum of a diagonal mechanical state:
  /// S = sum_n P_n Lambda_{n,n}.
  Spectrum spectrum_emission(const PhononDistribution& state,
                             std::span<const double> grid) const;

  /// Emission spectrum of a general mechanical state:
  /// S = sum_{m,n} rho_{m,n} Lambda_{n,m}. Hermitian input guarantees a real
  /// result; a relative imaginary residue above 1e-10 raises
  /// InternalConsistencyError.
  Spectrum spectrum_emission(const DensityMatrix& state,
                             std::span<const double> grid) const;

  /// Amplitude matrix B(n0, l) for n0 < rows, l < n_d, at one detuning.
  Eigen::MatrixXcd amplitude_matrix(double detuning, int rows) const;

  int n_d() const { return n_d_; }
  const SystemParams& params() const { return params_; }

 private:
  SystemParams params_;
  int n_d_;
  Eigen::MatrixXd fc_fwd_;  // <l|n~>   = F(l, n; +beta0)
  Eigen::MatrixXd fc_bwd_;  // <n~|n0>  = F(n, n0; -beta0)
};

}  // namespace omspec

#endif
