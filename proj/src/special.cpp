#include "omspec/special.hpp"

#include <cmath>
#include <stdexcept>

#include "omspec/errors.hpp"

namespace omspec {

double laguerre(int n, int a, double x) {
  if (n < 0 || a < 0) {
    throw InvalidInputError("laguerre: degree and order must be >= 0");
  }
  if (!std::isfinite(x)) {
    throw InvalidInputError("laguerre: argument must be finite");
  }
  double p0 = 1.0;
  if (n == 0) return p0;
  double p1 = 1.0 + a - x;
  for (int k = 1; k < n; ++k) {
    // L_{k+1}^a = ((2k+1+a-x) L_k^a - (k+a) L_{k-1}^a) / (k+1)
    const double p2 = ((2.0 * k + 1.0 + a - x) * p1 - (k + a) * p0) / (k + 1.0);
    p0 = p1;
    p1 = p2;
  }
  return p1;
}

double franck_condon(int m, int n, double beta) {
  if (m < 0 || n < 0) {
    throw InvalidInputError("franck_condon: indices must be >= 0");
  }
  const int lo = std::min(m, n);
  const int hi = std::max(m, n);
  const int d = hi - lo;
  const double signed_beta = (m - n - 0.5 > 0.0 ? beta : -beta);
  const double lag = laguerre(lo, d, beta * beta);

  if (m + n <= kFranckCondonLogSwitch) {
    double ratio = 1.0;  // lo!/hi! = 1/((lo+1)...(hi))
    for (int k = lo + 1; k <= hi; ++k) ratio /= static_cast<double>(k);
    return std::sqrt(ratio) * std::exp(-beta * beta / 2.0) *
           std::pow(signed_beta, d) * lag;
  }

  // Log-space magnitude with the sign carried separately.
  const double sign = (d % 2 == 1 && signed_beta < 0.0 ? -1.0 : 1.0) *
                      (lag < 0.0 ? -1.0 : 1.0);
  if (lag == 0.0 || (beta == 0.0 && d > 0)) return 0.0;
  const double log_mag = 0.5 * (std::lgamma(lo + 1.0) - std::lgamma(hi + 1.0)) -
                         beta * beta / 2.0 +
                         (d > 0 ? d * std::log(std::abs(signed_beta)) : 0.0) +
                         std::log(std::abs(lag));
  const double value = sign * std::exp(log_mag);
  if (std::isnan(value)) {
    throw InternalConsistencyError("franck_condon: evaluation produced NaN");
  }
  return value;
}

std::pair<double, double> displaced_overlap_pair(int l, int n, int n0,
                                                 double beta0) {
  return {franck_condon(l, n, beta0), franck_condon(n, n0, -beta0)};
}

Eigen::MatrixXd franck_condon_table(int rows, int cols, double beta) {
  Eigen::MatrixXd table(rows, cols);
  for (int m = 0; m < rows; ++m) {
    for (int n = 0; n < cols; ++n) {
      table(m, n) = franck_condon(m, n, beta);
    }
  }
  return table;
}

}  // namespace omspec
