#include "omspec/states.hpp"

#include <cmath>

#include "omspec/errors.hpp"

namespace omspec {

PhononDistribution thermal_distribution(double nbar, int N) {
  if (nbar < 0.0 || !std::isfinite(nbar)) {
    throw InvalidInputError("thermal_distribution: nbar must be >= 0");
  }
  if (N < 1) {
    throw InvalidInputError("thermal_distribution: N must be >= 1");
  }
  PhononDistribution p(N);
  const double ratio = nbar / (nbar + 1.0);
  double term = 1.0 / (nbar + 1.0);
  for (int n = 0; n < N; ++n) {
    p(n) = term;
    term *= ratio;
  }
  return p;
}

PhononDistribution maximally_mixed(int n_s, int N) {
  if (n_s < 1 || N < n_s) {
    throw InvalidInputError("maximally_mixed: require 1 <= n_s <= N");
  }
  PhononDistribution p = PhononDistribution::Zero(N);
  p.head(n_s).setConstant(1.0 / n_s);
  return p;
}

DensityMatrix superposed_fock_density(const Eigen::VectorXcd& coefficients) {
  const double norm = coefficients.norm();
  if (!(norm > 0.0)) {
    throw InvalidInputError("superposed_fock_density: all-zero coefficients");
  }
  const Eigen::VectorXcd psi = coefficients / norm;
  return psi * psi.adjoint();
}

double fidelity_distribution(const PhononDistribution& p,
                             const PhononDistribution& q) {
  if (p.size() != q.size()) {
    throw InvalidInputError("fidelity_distribution: length mismatch");
  }
  double s = 0.0;
  for (Eigen::Index n = 0; n < p.size(); ++n) {
    s += std::sqrt(std::max(p(n), 0.0) * std::max(q(n), 0.0));
  }
  return s * s;
}

namespace {

// Hermitian part with negative eigenvalues clipped; returns the principal
// square root of the result.
Eigen::MatrixXcd clipped_sqrt(const DensityMatrix& rho) {
  const Eigen::MatrixXcd herm = 0.5 * (rho + rho.adjoint());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(herm);
  Eigen::VectorXd vals = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * vals.asDiagonal() * es.eigenvectors().adjoint();
}

}  // namespace

double fidelity_density(const DensityMatrix& rho, const DensityMatrix& sigma) {
  if (rho.rows() != rho.cols() || sigma.rows() != sigma.cols()) {
    throw InvalidInputError("fidelity_density: matrices must be square");
  }
  if (rho.rows() != sigma.rows()) {
    throw InvalidInputError("fidelity_density: dimension mismatch");
  }
  const Eigen::MatrixXcd sqrt_rho = clipped_sqrt(rho);
  const Eigen::MatrixXcd sigma_h = 0.5 * (sigma + sigma.adjoint());
  const Eigen::MatrixXcd inner = sqrt_rho * sigma_h * sqrt_rho;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(inner);
  double tr = 0.0;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
    tr += std::sqrt(std::max(es.eigenvalues()(i), 0.0));
  }
  return tr * tr;
}

void check_input_distribution(const PhononDistribution& p, double tol) {
  if (p.size() == 0) {
    throw InvalidInputError("distribution: empty");
  }
  if ((p.array() < -tol).any()) {
    throw InvalidInputError("distribution: negative probability in input");
  }
  if (p.sum() > 1.0 + tol) {
    throw InvalidInputError("distribution: probabilities sum above 1");
  }
}

void check_input_density(const DensityMatrix& rho, double tol) {
  if (rho.rows() != rho.cols() || rho.rows() == 0) {
    throw InvalidInputError("density matrix: must be square and nonempty");
  }
  if ((rho - rho.adjoint()).cwiseAbs().maxCoeff() > tol) {
    throw InvalidInputError("density matrix: input not Hermitian");
  }
  if (rho.trace().real() > 1.0 + tol) {
    throw InvalidInputError("density matrix: trace above 1");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(
      0.5 * (rho + rho.adjoint()));
  if (es.eigenvalues().minCoeff() < -tol) {
    throw InvalidInputError("density matrix: input not positive semidefinite");
  }
}

}  // namespace omspec
