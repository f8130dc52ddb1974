#include <doctest.h>

#include <vector>

#include "test_support.hpp"
#include "wlmf/error.hpp"
#include "wlmf/matched_filter.hpp"
#include "wlmf/noise.hpp"
#include "wlmf/rng.hpp"

using namespace wlmf;

namespace {

struct Moments {
  double var_re = 0.0;
  double var_im = 0.0;
  Complex power;  // E[u u*]
  Complex pseudo; // E[u u]
};

Moments moments(const CVector& u) {
  Moments m;
  for (Eigen::Index i = 0; i < u.size(); ++i) {
    m.var_re += u(i).real() * u(i).real();
    m.var_im += u(i).imag() * u(i).imag();
    m.power += u(i) * std::conj(u(i));
    m.pseudo += u(i) * u(i);
  }
  const auto n = static_cast<double>(u.size());
  m.var_re /= n;
  m.var_im /= n;
  m.power /= n;
  m.pseudo /= n;
  return m;
}

double max_entry_error(const CovariancePair& a, const CovariancePair& b) {
  return std::max((a.r - b.r).cwiseAbs().maxCoeff(), (a.c - b.c).cwiseAbs().maxCoeff());
}

}  // namespace

TEST_CASE("sample_improper_white moments") {
  const Moments proper = moments(sample_improper_white(100000, 0.0, 1.0, 1));
  CHECK(std::abs(proper.var_re - 0.5) < 0.03 * 0.5);
  CHECK(std::abs(proper.var_im - 0.5) < 0.03 * 0.5);

  const CVector maximal = sample_improper_white(1000, 1.0, 1.0, 2);
  CHECK(maximal.imag().cwiseAbs().maxCoeff() == 0.0);

  const Moments half = moments(sample_improper_white(100000, 0.5, 1.0, 3));
  CHECK(std::abs(half.pseudo.real() - 0.5) < 0.03 * 0.5);
  CHECK(std::abs(half.pseudo.imag()) < 0.015);
  CHECK(std::abs(half.power.real() - 1.0) < 0.03);

  const Moments scaled = moments(sample_improper_white(100000, 0.2, 4.0, 4));
  CHECK(std::abs(scaled.power.real() - 4.0) < 0.03 * 4.0);
  CHECK(std::abs(scaled.pseudo.real() - 0.8) < 0.06);
}

TEST_CASE("sample_improper_white is reproducible and validates impropriety") {
  CHECK((sample_improper_white(64, 0.3, 1.0, 9) - sample_improper_white(64, 0.3, 1.0, 9)).norm() == 0.0);
  CHECK((sample_improper_white(64, 0.3, 1.0, 9) - sample_improper_white(64, 0.3, 1.0, 10)).norm() > 0.0);
  for (double bad : {-0.1, 1.1}) {
    try {
      sample_improper_white(10, bad, 1.0, 1);
      FAIL("expected InvalidImpropriety");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::InvalidImpropriety);
    }
  }
  CHECK_THROWS_AS(NoiseModel(benchmark_ma_taps(), 1.5), Error);
  CHECK_THROWS_AS(NoiseModel(CVector::Zero(2), 0.5), Error);
}

TEST_CASE("ma_filter") {
  std::mt19937_64 rng(3);
  const CVector u = wlmf::testing::random_vector(20, rng);
  CHECK((ma_filter(u, CVector::Ones(1)) - u).norm() == 0.0);

  CVector impulse = CVector::Zero(5);
  impulse(0) = 1.0;
  const CVector v = ma_filter(impulse, benchmark_ma_taps());
  CHECK(v(0) == Complex(0.9, 0.0));
  CHECK(v(1) == Complex(0.0, -0.1));
  CHECK(v.tail(3).norm() == 0.0);
  CHECK(v.size() == impulse.size());

  try {
    ma_filter(CVector(), benchmark_ma_taps());
    FAIL("expected EmptyInput");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::EmptyInput);
  }
}

TEST_CASE("analytic covariances of the MA(2) benchmark") {
  const CovariancePair cov = analytic_covariances(NoiseModel(benchmark_ma_taps(), 0.5), 4);
  CHECK(std::abs(cov.r(0, 0) - 0.82) < 1e-15);
  // r_01 = E[v(n) v*(n-1)] = r(1)
  CHECK(std::abs(cov.r(0, 1) - Complex(0.0, -0.09)) < 1e-15);
  CHECK(std::abs(cov.r(1, 0) - Complex(0.0, 0.09)) < 1e-15);
  CHECK(std::abs(cov.r(0, 2)) == 0.0);
  CHECK(std::abs(cov.c(0, 0) - 0.40) < 1e-15);
  CHECK(std::abs(cov.c(0, 1) - Complex(0.0, -0.045)) < 1e-15);
  CHECK(is_hermitian(cov.r, 0.0));
  CHECK(is_symmetric(cov.c, 0.0));

  const CovariancePair proper = analytic_covariances(NoiseModel(benchmark_ma_taps(), 0.0), 4);
  CHECK(proper.c.norm() == 0.0);
}

TEST_CASE("complementary covariance is linear in rho_u") {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 20; ++trial) {
    const CVector taps = wlmf::testing::random_vector(1 + trial % 4, rng);
    const double a = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    const CovariancePair one = analytic_covariances(NoiseModel(taps, 1.0), 5);
    const CovariancePair scaled = analytic_covariances(NoiseModel(taps, a), 5);
    CHECK((scaled.c - a * one.c).cwiseAbs().maxCoeff() == 0.0);
    CHECK((scaled.r - one.r).norm() == 0.0);
  }
}

TEST_CASE("augmented covariance is positive definite for rho_u < 1") {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> rho(0.0, 0.99);
  for (int trial = 0; trial < 200; ++trial) {
    const CVector taps = wlmf::testing::random_vector(1 + trial % 3, rng);
    const Eigen::Index len = 1 + trial % 8;
    const CovariancePair cov = analytic_covariances(NoiseModel(taps, rho(rng)), len);
    CHECK(is_positive_definite(augmented_covariance(cov)));
  }
}

TEST_CASE("empirical covariances") {
  const CovariancePair zero = empirical_covariances(CVector::Zero(100), 4);
  CHECK(zero.r.norm() == 0.0);
  CHECK(zero.c.norm() == 0.0);

  const CovariancePair white = empirical_covariances(sample_improper_white(100000, 0.0, 1.0, 5), 4);
  CHECK(white.c.norm() / white.r.norm() < 0.05);
  CHECK(is_hermitian(white.r, 0.0));
  CHECK(is_symmetric(white.c, 0.0));

  const NoiseModel model(benchmark_ma_taps(), 0.5);
  const CovariancePair exact = analytic_covariances(model, 4);
  const CovariancePair est = empirical_covariances(model.generate(100000, 6), 4);
  const double scale = exact.r.cwiseAbs().maxCoeff();
  CHECK((est.r - exact.r).cwiseAbs().maxCoeff() < 0.05 * scale);
  CHECK((est.c - exact.c).cwiseAbs().maxCoeff() < 0.05 * scale);

  try {
    empirical_covariances(CVector::Zero(39), 4);
    FAIL("expected InsufficientSamples");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::InsufficientSamples);
  }
}

TEST_CASE("empirical covariances converge to the analytic ones") {
  const NoiseModel model(benchmark_ma_taps(), 0.5);
  const CovariancePair exact = analytic_covariances(model, 4);
  std::vector<double> mean_error;
  for (std::size_t n : {1000u, 10000u, 100000u}) {
    double acc = 0.0;
    for (std::uint64_t s = 0; s < 20; ++s) {
      acc += max_entry_error(empirical_covariances(model.generate(n, derive_seed(77, s)), 4), exact);
    }
    mean_error.push_back(acc / 20.0);
  }
  CHECK(mean_error[1] < mean_error[0]);
  CHECK(mean_error[2] < mean_error[1]);
}
