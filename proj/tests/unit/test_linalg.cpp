#include <doctest.h>

#include <cmath>

#include "isoflow/errors.hpp"
#include "isoflow/linalg.hpp"
#include "isoflow/random.hpp"

using namespace isoflow;

namespace {
RealMatrix random_real(int n, RandomStream& rng) {
  RealMatrix m(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m(i, j) = rng.normal();
  return m;
}

ComplexMatrix random_complex(int n, RandomStream& rng) {
  ComplexMatrix m(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m(i, j) = Complex(rng.normal(), rng.normal());
  return m;
}
} // namespace

TEST_CASE("log_determinant agrees with the dense determinant") {
  RandomStream rng(1, 0);
  for (int n = 1; n <= 6; ++n) {
    const RealMatrix m = random_real(n, rng);
    const double det = m.determinant();
    const LogDet ld = log_determinant(m);
    CHECK(ld.sign == (det > 0 ? 1 : -1));
    CHECK(ld.log_abs == doctest::Approx(std::log(std::abs(det))).epsilon(1e-12));
  }
  RealMatrix singular = RealMatrix::Zero(3, 3);
  singular(0, 0) = 1;
  CHECK(log_determinant(singular).sign == 0);
  CHECK(std::isinf(log_determinant(singular).log_abs));
  CHECK_THROWS_AS(log_determinant(RealMatrix(2, 3)), ParameterError);
}

TEST_CASE("log_abs_sinh is accurate and does not overflow") {
  for (double x : {1e-8, 0.3, -0.9, 2.0, -15.0}) {
    CHECK(log_abs_sinh(x) == doctest::Approx(std::log(std::abs(std::sinh(x)))).epsilon(1e-13));
  }
  CHECK(log_abs_sinh(800.0) == doctest::Approx(800.0 - std::log(2.0)).epsilon(1e-15));
  CHECK(log_abs_sinh(-800.0) == doctest::Approx(800.0 - std::log(2.0)).epsilon(1e-15));
}

TEST_CASE("graded singular values match a dense SVD for moderate scales") {
  RandomStream rng(2, 0);
  for (int n = 1; n <= 6; ++n) {
    std::vector<double> scale(n);
    for (double& s : scale) s = 3.0 * rng.normal();
    RealMatrix t = random_real(n, rng).triangularView<Eigen::Upper>();
    t.diagonal().setOnes();
    RealMatrix full = t;
    for (int i = 0; i < n; ++i) full.row(i) *= std::exp(scale[i]);
    Eigen::JacobiSVD<RealMatrix> svd(full);
    auto got = graded_log_singular_values<double>(scale, t);
    for (int k = 0; k < n; ++k) {
      CHECK(got[k] == doctest::Approx(std::log(svd.singularValues()(n - 1 - k))).epsilon(1e-11));
    }

    ComplexMatrix tc = random_complex(n, rng).triangularView<Eigen::Upper>();
    for (int i = 0; i < n; ++i) tc(i, i) = std::polar(1.0, rng.normal());
    ComplexMatrix fc = tc;
    for (int i = 0; i < n; ++i) fc.row(i) *= std::exp(scale[i]);
    Eigen::JacobiSVD<ComplexMatrix> svdc(fc);
    auto gotc = graded_log_singular_values<Complex>(scale, tc);
    for (int k = 0; k < n; ++k) {
      CHECK(gotc[k] == doctest::Approx(std::log(svdc.singularValues()(n - 1 - k))).epsilon(1e-11));
    }
  }
}

TEST_CASE("graded singular values survive scales far beyond double range") {
  // diag(e^{s1}, e^{s2}) [[1, a], [0, 1]] with s1 - s2 = 2000: the large
  // singular value is e^{s1} sqrt(1 + a²) up to e^{-2000} corrections, and
  // the product of both is e^{s1 + s2}.
  const double a = 0.75;
  const std::vector<double> scale{1000.0, -1000.0};
  RealMatrix t(2, 2);
  t << 1.0, a, 0.0, 1.0;
  const auto got = graded_log_singular_values<double>(scale, t);
  const double top = 1000.0 + 0.5 * std::log1p(a * a);
  CHECK(got[1] == doctest::Approx(top).epsilon(1e-14));
  CHECK(got[0] == doctest::Approx(-top).epsilon(1e-14));

  // Reversed grading: the lower row dominates.
  const std::vector<double> rev{-1000.0, 1000.0};
  const auto got_rev = graded_log_singular_values<double>(rev, t);
  CHECK(got_rev[1] == doctest::Approx(1000.0).epsilon(1e-14));
  CHECK(got_rev[0] == doctest::Approx(-1000.0).epsilon(1e-14));
}

TEST_CASE("half_log_gram_eigenvalues on simple products") {
  RealMatrix d = RealMatrix::Zero(2, 2);
  d(0, 0) = 2.0;
  d(1, 1) = 0.5;
  const auto lam = half_log_gram_eigenvalues(d);
  CHECK(lam[0] == doctest::Approx(-std::log(2.0)));
  CHECK(lam[1] == doctest::Approx(std::log(2.0)));

  RealMatrix bad = RealMatrix::Identity(2, 2);
  bad(0, 0) = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(half_log_gram_eigenvalues(bad), NumericalOverflowError);
  CHECK_THROWS_AS(half_log_gram_eigenvalues(RealMatrix(RealMatrix::Zero(2, 2))),
                  NumericalOverflowError);
}

TEST_CASE("orthonormality_defect") {
  CHECK(orthonormality_defect(RealMatrix(RealMatrix::Identity(4, 4))) == 0.0);
  RealMatrix m = RealMatrix::Identity(2, 2);
  m(0, 1) = 0.1;
  CHECK(orthonormality_defect(m) == doctest::Approx(0.1));
}
