#ifndef OMSPEC_SPECIAL_HPP
#define OMSPEC_SPECIAL_HPP

#include <Eigen/Dense>
#include <utility>

namespace omspec {

/// Generalized Laguerre polynomial L_n^a(x), evaluated with the standard
/// three-term recurrence (stable for x >= 0).
double laguerre(int n, int a, double x);

/// Displacement-operator matrix element <m|D(beta)|n> between phonon number
/// states, real for real beta:
///
///   sqrt(min(m,n)!/max(m,n)!) * exp(-beta^2/2)
///     * (sign(m-n-1/2)*beta)^|m-n| * L_{min(m,n)}^{|m-n|}(beta^2)
///
/// The factorial ratio switches to log space once m+n grows large, so the
/// result never overflows for indices in practical use.
double franck_condon(int m, int n, double beta);

/// Factorial-ratio switchover point used by franck_condon; exposed so a test
/// can pin continuity at the boundary.
inline constexpr int kFranckCondonLogSwitch = 40;

/// Overlap pair (<l|n~>, <n~|n0>) for the displaced phonon basis
/// |n~> = D(beta0)|n>.
std::pair<double, double> displaced_overlap_pair(int l, int n, int n0,
                                                 double beta0);

/// Dense table F(m, n) = <m|D(beta)|n> with m < rows, n < cols.
Eigen::MatrixXd franck_condon_table(int rows, int cols, double beta);

}  // namespace omspec

#endif
