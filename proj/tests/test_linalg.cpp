#include <doctest.h>

#include "test_support.hpp"
#include "wlmf/error.hpp"
#include "wlmf/linalg.hpp"
#include "wlmf/matched_filter.hpp"
#include "wlmf/noise.hpp"

using namespace wlmf;
using wlmf::testing::random_hpd;
using wlmf::testing::random_symmetric;
using wlmf::testing::random_vector;

namespace {

CovariancePair benchmark_pair(double rho_u, Eigen::Index len) {
  return analytic_covariances(NoiseModel(benchmark_ma_taps(), rho_u), len);
}

}  // namespace

TEST_CASE("hermitian_solve on identity and diagonal systems") {
  CVector b(3);
  b << 1.0, kJ, -1.0;
  CHECK((hermitian_solve(CMatrix::Identity(3, 3), b) - b).norm() == doctest::Approx(0.0));

  CMatrix d = CMatrix::Zero(2, 2);
  d(0, 0) = 2.0;
  d(1, 1) = 4.0;
  CVector rhs(2);
  rhs << 2.0, 4.0;
  const CVector y = hermitian_solve(d, rhs);
  CHECK(std::abs(y(0) - 1.0) < 1e-15);
  CHECK(std::abs(y(1) - 1.0) < 1e-15);
}

TEST_CASE("hermitian_solve residual on random positive definite systems") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    const CMatrix a = random_hpd(5, rng);
    const CVector b = random_vector(5, rng);
    const CVector y = hermitian_solve(a, b);
    CHECK((a * y - b).norm() < 1e-10 * b.norm());
    // solve after multiply returns the original vector
    CHECK((hermitian_solve(a, a * b) - b).norm() < 1e-9 * b.norm());
  }
}

TEST_CASE("hermitian_solve errors") {
  CMatrix indefinite = CMatrix::Zero(2, 2);
  indefinite(0, 0) = 1.0;
  indefinite(1, 1) = -1.0;
  try {
    hermitian_solve(indefinite, CVector::Ones(2));
    FAIL("expected NotPositiveDefinite");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::NotPositiveDefinite);
  }
  try {
    hermitian_solve(CMatrix::Identity(3, 3), CVector::Ones(2));
    FAIL("expected DimensionMismatch");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::DimensionMismatch);
  }
  CMatrix skew = CMatrix::Identity(2, 2);
  skew(0, 1) = kJ;
  CHECK_THROWS_AS(hermitian_solve(skew, CVector::Ones(2)), Error);
  CMatrix nan = CMatrix::Identity(2, 2);
  nan(0, 0) = std::nan("");
  CHECK_THROWS_AS(hermitian_solve(nan, CVector::Ones(2)), Error);
}

TEST_CASE("is_positive_definite") {
  CHECK(is_positive_definite(CMatrix::Identity(4, 4)));
  CMatrix d = CMatrix::Zero(2, 2);
  d(0, 0) = 1.0;
  d(1, 1) = -1.0;
  CHECK_FALSE(is_positive_definite(d));
  CHECK_FALSE(is_positive_definite(CMatrix::Zero(3, 3)));

  // Augmented covariance of an improper MA model, and its sample estimate.
  const CovariancePair cov = benchmark_pair(0.5, 4);
  CHECK(is_positive_definite(augmented_covariance(cov)));
  const NoiseModel model(benchmark_ma_taps(), 0.5);
  const CovariancePair est = empirical_covariances(model.generate(20000, 3), 4);
  CHECK(is_positive_definite(augmented_covariance(est)));

  // Pivot tolerance is scale relative.
  CMatrix tiny = CMatrix::Identity(2, 2);
  tiny(1, 1) = 1e-14;
  CHECK_FALSE(is_positive_definite(tiny));
  CHECK(is_positive_definite(tiny, 1e-15));
}

TEST_CASE("takagi of the zero matrix") {
  const TakagiResult t = takagi(CMatrix::Zero(3, 3));
  CHECK(t.values.norm() == 0.0);
  CHECK((t.q.adjoint() * t.q - CMatrix::Identity(3, 3)).norm() < 1e-12);

  // With a companion, the free basis follows the companion's eigenvectors.
  CMatrix companion = CMatrix::Zero(3, 3);
  companion(0, 0) = 1.0;
  companion(1, 1) = 3.0;
  companion(2, 2) = 2.0;
  const TakagiResult tc = takagi(CMatrix::Zero(3, 3), companion);
  const CMatrix rotated = tc.q.adjoint() * companion * tc.q;
  CHECK(std::abs(rotated(0, 0) - 3.0) < 1e-12);
  CHECK(std::abs(rotated(1, 1) - 2.0) < 1e-12);
  CHECK(std::abs(rotated(2, 2) - 1.0) < 1e-12);
}

TEST_CASE("takagi of a real diagonal matrix") {
  CMatrix c = CMatrix::Zero(2, 2);
  c(0, 0) = 0.5;
  c(1, 1) = 0.2;
  const TakagiResult t = takagi(c);
  CHECK(t.values(0) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(t.values(1) == doctest::Approx(0.2).epsilon(1e-14));
  // Q = I up to a per-column phase.
  CHECK(std::abs(t.q(0, 0)) == doctest::Approx(1.0));
  CHECK(std::abs(t.q(1, 1)) == doctest::Approx(1.0));
  CHECK(std::abs(t.q(0, 1)) < 1e-12);
}

TEST_CASE("takagi values of the MA(2) complementary covariance") {
  const CovariancePair cov = benchmark_pair(0.5, 6);
  const TakagiResult t = takagi(cov.c);
  for (Eigen::Index i = 0; i < 6; ++i) CHECK(std::abs(t.values(i) - 0.40) <= 0.01);
  CHECK((t.q * t.values.cast<Complex>().asDiagonal() * t.q.transpose() - cov.c).norm() <
        1e-12);
}

TEST_CASE("takagi invariants on random symmetric matrices") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 1000; ++trial) {
    const Eigen::Index n = 1 + trial % 8;
    CMatrix c = random_symmetric(n, rng);
    if (trial % 10 == 9 && n > 2) {
      // rank deficient with a repeated value
      const CMatrix u = wlmf::testing::random_unitary(n, rng);
      RVector s = RVector::Zero(n);
      s(0) = 1.0;
      s(1) = 1.0;
      c = u * s.cast<Complex>().asDiagonal() * u.transpose();
    }
    const TakagiResult t = takagi(c);
    CHECK((t.q * t.q.adjoint() - CMatrix::Identity(n, n)).norm() <= 1e-10);
    CHECK((t.q * t.values.cast<Complex>().asDiagonal() * t.q.transpose() - c).norm() <=
          1e-8 * c.norm());
    for (Eigen::Index i = 0; i + 1 < n; ++i) CHECK(t.values(i) >= t.values(i + 1));
    CHECK(t.values.minCoeff() >= 0.0);
    const RVector sv = Eigen::JacobiSVD<CMatrix>(c).singularValues();
    CHECK((t.values - sv).cwiseAbs().maxCoeff() <= 1e-9 * std::max(1.0, sv(0)));
  }
}

TEST_CASE("takagi rejects non-symmetric input") {
  CMatrix c = CMatrix::Identity(2, 2);
  c(0, 1) = 1.0;
  try {
    takagi(c);
    FAIL("expected NotSymmetric");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::NotSymmetric);
  }
}

TEST_CASE("hermitian_eig") {
  const HermitianEig id = hermitian_eig(CMatrix::Identity(3, 3));
  CHECK((id.values - RVector::Ones(3)).norm() < 1e-14);

  CMatrix d = CMatrix::Zero(2, 2);
  d(0, 0) = 1.0;
  d(1, 1) = 3.0;
  const HermitianEig e = hermitian_eig(d);
  CHECK(e.values(0) == doctest::Approx(3.0));
  CHECK(e.values(1) == doctest::Approx(1.0));

  // MA(2) covariance eigenvalues against the listed diagonal.
  const CovariancePair cov = benchmark_pair(0.5, 6);
  const HermitianEig me = hermitian_eig(cov.r);
  const double listed[] = {0.98, 0.93, 0.86, 0.77, 0.70, 0.65};
  for (int i = 0; i < 6; ++i) CHECK(std::abs(me.values(i) - listed[i]) <= 0.02);
  CHECK((cov.r * me.vectors - me.vectors * me.values.cast<Complex>().asDiagonal()).norm() <=
        1e-9 * cov.r.norm());

  CMatrix skew = CMatrix::Identity(2, 2);
  skew(0, 1) = 1.0;
  try {
    hermitian_eig(skew);
    FAIL("expected NotHermitian");
  } catch (const Error& err) {
    CHECK(err.kind() == ErrorKind::NotHermitian);
  }
}

TEST_CASE("hermitian_eig is invariant under unitary conjugation") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 100; ++trial) {
    const Eigen::Index n = 1 + trial % 8;
    const CMatrix a = random_hpd(n, rng) - 0.5 * CMatrix::Identity(n, n);
    const CMatrix u = wlmf::testing::random_unitary(n, rng);
    const HermitianEig e1 = hermitian_eig(a);
    const HermitianEig e2 = hermitian_eig(CMatrix(u * a * u.adjoint()));
    CHECK((e1.values - e2.values).cwiseAbs().maxCoeff() <= 1e-9 * std::max(1.0, a.norm()));
    for (Eigen::Index i = 0; i + 1 < n; ++i) CHECK(e1.values(i) >= e1.values(i + 1));
  }
}
