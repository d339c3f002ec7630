#ifndef OMSPEC_RECONSTRUCT_HPP
#define OMSPEC_RECONSTRUCT_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

#include "omspec/params.hpp"
#include "omspec/spectra.hpp"
#include "omspec/states.hpp"

namespace omspec {

enum class PlanStrategy { SidebandPeaks, RandomUniform, Explicit };

/// Detunings at which the spectrum is read to assemble a linear system.
struct SamplePlan {
  std::vector<double> points;
  PlanStrategy strategy = PlanStrategy::Explicit;

  int size() const { return static_cast<int>(points.size()); }
  void validate(double omega_m = 1.0) const;  ///< nonempty, pairwise distinct
};

/// N points on the phonon sideband peaks: Delta = -delta + j * omega_m,
/// j in {-floor(N/2), ..., -floor(N/2) + N - 1} (even N drops the +floor(N/2)
/// endpoint).
SamplePlan sideband_plan(int N, const SystemParams& params);

/// N^2 points for the general problem: the N-point sideband plan replicated
/// N times with sub-harmonic shifts i * omega_m / N, i = 0..N-1.
SamplePlan general_sideband_plan(int N, const SystemParams& params);

/// N distinct uniform draws in [low, high), reproducible from the seed;
/// draws closer than 1e-6 * omega_m to an accepted point are rejected.
SamplePlan random_plan(int N, double low, double high, std::uint64_t seed,
                       const SystemParams& params);

SamplePlan explicit_plan(std::vector<double> points);

/// Diagonal inverse problem K P = Q; K_{j,j'} = S_{|j'-1>}(Delta_j).
struct DiagonalProblem {
  Eigen::MatrixXd k;
  Eigen::VectorXd q;
  Eigen::VectorXd sigma;  ///< per-point std deviations; empty when noiseless
  int truncation = 0;     ///< N
  SamplePlan plan;
  SystemParams params;
  int n_d = 0;
};

/// General inverse problem M C = R over flattened density-matrix elements;
/// M_{j,j'} = Lambda_{n,m}(Delta_j) with m = floor((j'-1)/N), n = j'-1 - mN.
struct GeneralProblem {
  Eigen::MatrixXcd m;
  Eigen::VectorXcd r;
  Eigen::VectorXd sigma;
  int truncation = 0;  ///< N; the system is N^2 x N^2
  SamplePlan plan;
  SystemParams params;
  int n_d = 0;
};

struct DiagonalResult {
  PhononDistribution solution;  ///< raw solve; negatives are NOT clipped
  double condition_number = 0.0;
  double residual = 0.0;  ///< ||K x - Q||_2 recomputed after the solve
};

struct GeneralResult {
  DensityMatrix solution;  ///< reshaped C; no physicality projection
  double condition_number = 0.0;
  double residual = 0.0;
  double hermiticity_deviation = 0.0;  ///< ||rho - rho^dagger||_max
  double trace = 0.0;
  bool projected = false;
};

inline constexpr double kConditionCap = 1e12;

DiagonalProblem build_diagonal_problem(const SamplePlan& plan,
                                       const Eigen::VectorXd& spectrum_values,
                                       const SystemParams& params, int n_d,
                                       const Eigen::VectorXd& sigma = {});

/// Stable direct solve (SVD); weighted least squares when sigmas are present.
/// Condition number above the cap raises IllPosedError naming the plan.
DiagonalResult solve_diagonal(const DiagonalProblem& problem,
                              double condition_cap = kConditionCap);

GeneralProblem build_general_problem(const SamplePlan& plan,
                                     const Eigen::VectorXd& spectrum_values,
                                     const SystemParams& params, int n_d,
                                     const Eigen::VectorXd& sigma = {});

GeneralResult solve_general(const GeneralProblem& problem,
                            double condition_cap = kConditionCap);

/// Nearest-density-matrix projection: Hermitian part, eigenvalue clipping,
/// trace renormalization. Optional post-processing for noisy inputs.
DensityMatrix project_to_physical(const DensityMatrix& rho);

struct ScanConfig {
  PlanStrategy strategy = PlanStrategy::SidebandPeaks;
  double range_low = -5.0;   ///< RandomUniform only
  double range_high = 5.0;   ///< RandomUniform only
  std::uint64_t seed = 0;    ///< RandomUniform only; per-N seed is seed + N
  double tol = 1e-3;         ///< L1 convergence threshold
};

struct ScanEntry {
  int truncation = 0;
  SamplePlan plan;
  PhononDistribution solution;
  double condition_number = 0.0;
  double residual = 0.0;
  double l1_step = -1.0;  ///< L1 distance to the previous solution; -1 first
};

struct ScanResult {
  bool converged = false;
  int converged_n = -1;  ///< first N with two sub-tol steps ahead of it
  std::vector<ScanEntry> history;
};

/// Step-up truncation scan of the diagonal problem. `values_for_plan` maps a
/// plan to measured/synthetic spectrum values at its points. Convergence:
/// the L1 distance between consecutive solutions (zero-padded) is below tol
/// for two successive steps; no convergence yields a report, not an error.
ScanResult convergence_scan(
    const std::function<Eigen::VectorXd(const SamplePlan&)>& values_for_plan,
    const SystemParams& params, int n_d, int n_min, int n_max,
    const ScanConfig& config = {});

}  // namespace omspec

#endif
