#ifndef OMSPEC_STATES_HPP
#define OMSPEC_STATES_HPP

#include <Eigen/Dense>

namespace omspec {

/// Phonon-number distribution P_n over the truncated Fock space.
using PhononDistribution = Eigen::VectorXd;

/// Mechanical density matrix in the Fock basis.
using DensityMatrix = Eigen::MatrixXcd;

/// Numerical slack for state-validity checks.
inline constexpr double kStateTolerance = 1e-9;

/// Thermal occupation P_n = nbar^n / (nbar+1)^(n+1) for n = 0..N-1.
/// Deliberately NOT renormalized after truncation; the tail probability
/// (nbar/(nbar+1))^N is simply dropped.
PhononDistribution thermal_distribution(double nbar, int N);

/// Uniform distribution over the lowest n_s levels, zero above, length N.
PhononDistribution maximally_mixed(int n_s, int N);

/// Pure-state density matrix |psi><psi| from (unnormalized) Fock-basis
/// coefficients. Throws InvalidInputError on an all-zero vector.
DensityMatrix superposed_fock_density(const Eigen::VectorXcd& coefficients);

/// Classical fidelity (sum_n sqrt(P_n Q_n))^2. Negative entries (which a
/// reconstruction may legitimately produce) are clipped to zero before use.
double fidelity_distribution(const PhononDistribution& p,
                             const PhononDistribution& q);

/// Uhlmann fidelity (tr sqrt(sqrt(rho) sigma sqrt(rho)))^2. Both inputs are
/// Hermitian-symmetrized and eigenvalue-clipped at zero first, so raw
/// reconstruction outputs are acceptable.
double fidelity_density(const DensityMatrix& rho, const DensityMatrix& sigma);

/// Validate an input distribution: entries >= -tol, sum <= 1 + tol.
void check_input_distribution(const PhononDistribution& p,
                              double tol = kStateTolerance);

/// Validate an input density matrix: Hermitian, trace <= 1 + tol, positive
/// semidefinite to tolerance.
void check_input_density(const DensityMatrix& rho,
                         double tol = kStateTolerance);

}  // namespace omspec

#endif
