#include <doctest.h>

#include <cmath>
#include <unsupported/Eigen/MatrixFunctions>

#include "omspec/errors.hpp"
#include "omspec/special.hpp"

using namespace omspec;

namespace {

// Independent Laguerre evaluation: the explicit power series
// L_n^a(x) = sum_k (-1)^k binom(n+a, n-k) x^k / k!, in long double.
long double laguerre_series(int n, int a, double x) {
  long double sum = 0.0L;
  for (int k = 0; k <= n; ++k) {
    long double binom = 1.0L;
    // binom(n+a, n-k) = prod_{i=1..n-k} (a+k+i) / i
    for (int i = 1; i <= n - k; ++i) {
      binom *= static_cast<long double>(a + k + i) / i;
    }
    long double term = binom;
    for (int i = 1; i <= k; ++i) term *= -static_cast<long double>(x) / i;
    sum += term;
  }
  return sum;
}

// Independent Franck-Condon evaluation: matrix exponential of the truncated
// displacement generator beta * (b^dag - b).
Eigen::MatrixXd displacement_matrix(int dim, double beta) {
  Eigen::MatrixXd gen = Eigen::MatrixXd::Zero(dim, dim);
  for (int n = 0; n + 1 < dim; ++n) {
    gen(n + 1, n) = beta * std::sqrt(n + 1.0);   // b^dag
    gen(n, n + 1) = -beta * std::sqrt(n + 1.0);  // -b
  }
  return gen.exp();
}

}  // namespace

TEST_CASE("laguerre matches the power series") {
  // The alternating series cancels heavily at large n*x, so the comparison
  // tolerance is set by the oracle, not the recurrence under test.
  for (int n : {0, 1, 2, 5, 12, 25}) {
    for (int a : {0, 1, 3, 10}) {
      for (double x : {0.0, 0.3, 1.0, 4.0, 9.5}) {
        const double expected =
            static_cast<double>(laguerre_series(n, a, x));
        const double got = laguerre(n, a, x);
        CHECK(got ==
              doctest::Approx(expected).epsilon(1e-8).scale(
                  std::abs(expected) + 1.0));
      }
    }
  }
}

TEST_CASE("laguerre matches high-precision golden values") {
  // Worst cancellation points of the series test, evaluated at 50-digit
  // precision.
  CHECK(laguerre(25, 10, 4.0) ==
        doctest::Approx(3829.9551302216668125).epsilon(1e-13));
  CHECK(laguerre(25, 3, 9.5) ==
        doctest::Approx(39.401345830665049053).epsilon(1e-13));
  CHECK(laguerre(25, 10, 9.5) ==
        doctest::Approx(5224.5881747819375372).epsilon(1e-13));
  CHECK(laguerre(12, 10, 9.5) ==
        doctest::Approx(-173.92383789245936153).epsilon(1e-13));
}

TEST_CASE("franck_condon matches the displacement matrix exponential") {
  const int dim = 64;
  for (double beta : {2.0, -2.0, 0.7, -0.7}) {
    const Eigen::MatrixXd d = displacement_matrix(dim, beta);
    for (int m = 0; m <= 14; ++m) {
      for (int n = 0; n <= 14; ++n) {
        CHECK(franck_condon(m, n, beta) ==
              doctest::Approx(d(m, n)).epsilon(1e-9).scale(1.0));
      }
    }
  }
}

TEST_CASE("franck_condon is continuous across the log-space switchover") {
  // Indices straddling kFranckCondonLogSwitch, checked against the matrix
  // exponential oracle in a basis large enough for convergence.
  const int dim = 140;
  const double beta = 2.0;
  const Eigen::MatrixXd d = displacement_matrix(dim, beta);
  for (int m = kFranckCondonLogSwitch - 4; m <= kFranckCondonLogSwitch + 4;
       ++m) {
    for (int n : {0, 1, 5, m - 1, m, m + 1}) {
      if (n < 0) continue;
      CHECK(franck_condon(m, n, beta) ==
            doctest::Approx(d(m, n)).epsilon(1e-8).scale(1.0));
    }
  }
}

TEST_CASE("franck_condon columns are unit vectors (displacement unitarity)") {
  const double beta = 2.0;
  for (int n = 0; n <= 10; ++n) {
    double sum = 0.0;
    for (int m = 0; m < 200; ++m) {
      const double f = franck_condon(m, n, beta);
      sum += f * f;
    }
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("franck_condon columns are orthogonal") {
  const double beta = 2.0;
  for (int n = 0; n <= 6; ++n) {
    for (int m = n + 1; m <= 7; ++m) {
      double dot = 0.0;
      for (int l = 0; l < 200; ++l) {
        dot += franck_condon(l, n, beta) * franck_condon(l, m, beta);
      }
      CHECK(std::abs(dot) < 1e-12);
    }
  }
}

TEST_CASE("franck_condon symmetry under transpose and beta negation") {
  // D(-beta) = D(beta)^dag, so F(m, n, -beta) = F(n, m, beta).
  for (int m = 0; m <= 12; ++m) {
    for (int n = 0; n <= 12; ++n) {
      CHECK(franck_condon(m, n, -2.0) ==
            doctest::Approx(franck_condon(n, m, 2.0)).epsilon(1e-13).scale(1.0));
    }
  }
}

TEST_CASE("franck_condon at zero displacement is the identity") {
  // Exercises both evaluation branches, including d = 0 in log space.
  for (int m : {0, 3, 25, 60}) {
    CHECK(franck_condon(m, m, 0.0) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(franck_condon(m, m + 2, 0.0) == 0.0);
    CHECK(franck_condon(m + 1, m, 0.0) == 0.0);
  }
}

TEST_CASE("franck_condon stays finite at large indices") {
  const double v = franck_condon(180, 170, 2.0);
  CHECK(std::isfinite(v));
  CHECK(std::abs(v) <= 1.0);
}

TEST_CASE("displaced_overlap_pair consistency") {
  const auto [out, in] = displaced_overlap_pair(3, 5, 1, 2.0);
  CHECK(out == doctest::Approx(franck_condon(3, 5, 2.0)).epsilon(1e-15));
  CHECK(in == doctest::Approx(franck_condon(5, 1, -2.0)).epsilon(1e-15));
}

TEST_CASE("franck_condon_table matches scalar calls") {
  const Eigen::MatrixXd t = franck_condon_table(6, 5, -2.0);
  for (int m = 0; m < 6; ++m) {
    for (int n = 0; n < 5; ++n) {
      CHECK(t(m, n) == doctest::Approx(franck_condon(m, n, -2.0)).epsilon(1e-15));
    }
  }
}

TEST_CASE("invalid special-function arguments throw") {
  CHECK_THROWS_AS(laguerre(-1, 0, 1.0), InvalidInputError);
  CHECK_THROWS_AS(franck_condon(-1, 0, 1.0), InvalidInputError);
  CHECK_THROWS_AS(franck_condon(0, -2, 1.0), InvalidInputError);
}
