#ifndef OMSPEC_ORACLE_HPP
#define OMSPEC_ORACLE_HPP

#include <Eigen/Dense>
#include <Eigen/SparseCore>
#include <complex>
#include <map>
#include <mutex>
#include <vector>

#include "omspec/params.hpp"
#include "omspec/states.hpp"

namespace omspec {

/// Riemann-sum replacement of the photon continuum: modes at
/// Delta_j = -window + j * dk, j = 0..modes-1, dk = 2*window/modes.
struct ContinuumDiscretization {
  double window = 60.0;  ///< half-width W of the detuning band
  int modes = 12000;     ///< number of discrete outside modes

  double dk() const { return 2.0 * window / modes; }
  double mode_detuning(int j) const { return -window + j * dk(); }
  std::vector<double> grid() const;

  /// The band must cover the sideband comb and the mode spacing must
  /// resolve the cavity linewidth (dk <= gamma_c / 10).
  void validate(const SystemParams& params, int n_sideband = 8) const;
};

enum class PhotonVariant { Emission, Scattering };

struct InitialCondition {
  PhotonVariant variant = PhotonVariant::Emission;
  LorentzianPacket packet{};  ///< used by the scattering variant only
  int mechanical_fock = 0;    ///< n0
};

struct OracleConfig {
  ContinuumDiscretization disc{};
  int n_d = 48;                      ///< phonon truncation of the state
  double t_final_over_gamma = 15.0;  ///< t_final = this / gamma_c
  double tol = 1e-9;                 ///< norm-drift tolerance
  long dimension_cap = 4'000'000;    ///< refuse larger state vectors
};

/// Full single-photon-subspace wavefunction: cavity(l) multiplies
/// |1>_a |l>_b, outside(l, j) multiplies |0>_a |l>_b |1_j>.
struct WavefunctionState {
  Eigen::VectorXcd cavity;
  Eigen::MatrixXcd outside;

  double norm_squared() const {
    return cavity.squaredNorm() + outside.squaredNorm();
  }
};

struct EvolutionDiagnostics {
  double norm_drift = 0.0;         ///< max |norm - 1| seen along the run
  double cavity_population = 0.0;  ///< sum |A_l|^2 at t_final
  double revival_margin = 0.0;     ///< (2*pi/dk) / t_final
  double energy_drift = 0.0;       ///< |<H>(t_final) - <H>(0)|
  long matvec_count = 0;
  double t_final = 0.0;
};

/// Sparse Hamiltonian of the discretized model over the single-photon
/// subspace, basis {|1,l>} followed by {|0,l,1_j>} at index
/// n_d + l*modes + j. Real symmetric.
Eigen::SparseMatrix<double> build_hamiltonian(const SystemParams& params,
                                              const ContinuumDiscretization& disc,
                                              int n_d,
                                              long dimension_cap = 4'000'000);

/// Brute-force time-domain reference: evolves the discretized model with a
/// Chebyshev expansion of the propagator (matrix-free, unitary to the
/// expansion tolerance) and reads spectra from the long-time outside
/// amplitudes.
class OracleEngine {
 public:
  OracleEngine(const SystemParams& params, const OracleConfig& config);

  /// Propagate one initial condition to t_final.
  WavefunctionState evolve(const InitialCondition& init,
                           EvolutionDiagnostics* diag = nullptr) const;

  /// Spectrum of a diagonal mechanical state on the discretization grid.
  Spectrum spectrum(const PhononDistribution& state, PhotonVariant variant,
                    const LorentzianPacket& packet = {}) const;

  /// Spectrum of a general mechanical state on the discretization grid.
  Spectrum spectrum(const DensityMatrix& state, PhotonVariant variant,
                    const LorentzianPacket& packet = {}) const;

  /// Matrix-free H application; equals build_hamiltonian's matrix action.
  WavefunctionState apply_hamiltonian(const WavefunctionState& psi) const;

  const std::vector<double>& grid() const { return grid_; }
  double t_final() const;
  const OracleConfig& config() const { return config_; }
  const SystemParams& params() const { return params_; }

  /// Diagnostics of every evolution run so far, as "key = value" lines.
  std::string diagnostics_report() const;

 private:
  struct CacheKey {
    PhotonVariant variant;
    double packet_center;
    double packet_width;
    int n0;
    auto operator<=>(const CacheKey&) const = default;
  };

  WavefunctionState initial_state(const InitialCondition& init) const;
  const Eigen::MatrixXcd& cached_amplitudes(PhotonVariant variant,
                                            const LorentzianPacket& packet,
                                            int n0) const;

  SystemParams params_;
  OracleConfig config_;
  std::vector<double> grid_;
  Eigen::MatrixXd cavity_block_;     // n_d x n_d tridiagonal
  Eigen::MatrixXd outside_diag_;     // (l, j) -> l*omega_m + Delta_j
  double coupling_ = 0.0;            // sqrt(gamma_c * dk / (2 pi))
  double spec_center_ = 0.0;         // Chebyshev shift
  double spec_radius_ = 0.0;         // Chebyshev scale

  mutable std::mutex cache_mutex_;
  mutable std::map<CacheKey, Eigen::MatrixXcd> amplitude_cache_;
  mutable std::vector<std::pair<CacheKey, EvolutionDiagnostics>> run_log_;
};

}  // namespace omspec

#endif
