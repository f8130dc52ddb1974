#pragma once

#include <cmath>
#include <numbers>
#include <random>

#include "wlmf/linalg.hpp"
#include "wlmf/noise.hpp"

namespace wlmf::testing {

inline Complex complex_normal(std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, std::sqrt(0.5));
  const double re = n(rng);
  const double im = n(rng);
  return {re, im};
}

inline CVector random_vector(Eigen::Index n, std::mt19937_64& rng) {
  CVector v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = complex_normal(rng);
  return v;
}

inline CMatrix random_matrix(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng) {
  CMatrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = complex_normal(rng);
  }
  return m;
}

/// Well-conditioned Hermitian positive definite matrix.
inline CMatrix random_hpd(Eigen::Index n, std::mt19937_64& rng) {
  const CMatrix a = random_matrix(n, n + 2, rng);
  return a * a.adjoint() / static_cast<double>(n + 2) + 0.1 * CMatrix::Identity(n, n);
}

inline CMatrix random_symmetric(Eigen::Index n, std::mt19937_64& rng) {
  const CMatrix a = random_matrix(n, n, rng);
  return 0.5 * (a + a.transpose());
}

inline CMatrix random_unitary(Eigen::Index n, std::mt19937_64& rng) {
  Eigen::HouseholderQR<CMatrix> qr(random_matrix(n, n, rng));
  return qr.householderQ() * CMatrix::Identity(n, n);
}

/// Covariance pair of v = A n + B conj(n) for proper white n of dimension
/// L + 2, which makes the augmented covariance positive definite.
inline CovariancePair random_improper_pair(Eigen::Index n, std::mt19937_64& rng) {
  const CMatrix a = random_matrix(n, n + 2, rng);
  const CMatrix b = 0.6 * random_matrix(n, n + 2, rng);
  CovariancePair cov{a * a.adjoint() + b * b.adjoint(), a * b.transpose() + b * a.transpose()};
  cov.r = 0.5 * (cov.r + cov.r.adjoint()).eval();
  cov.c = 0.5 * (cov.c + cov.c.transpose()).eval();
  return cov;
}

/// Unitary DFT matrix.
inline CMatrix dft_matrix(Eigen::Index n) {
  CMatrix f(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index k = 0; k < n; ++k) {
      f(i, k) = std::polar(1.0 / std::sqrt(static_cast<double>(n)),
                           -2.0 * std::numbers::pi * static_cast<double>(i * k) / static_cast<double>(n));
    }
  }
  return f;
}

/// Circulant R = F diag(lambda) F^H and C = F diag(p) F^T sharing the DFT
/// basis, with lambda and p both descending and p < lambda.
inline CovariancePair joint_circulant_pair(Eigen::Index n) {
  const CMatrix f = dft_matrix(n);
  RVector lambda(n);
  RVector p(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    lambda(i) = 2.0 - 0.15 * static_cast<double>(i);
    p(i) = 0.9 - 0.1 * static_cast<double>(i);
  }
  return {f * lambda.cast<Complex>().asDiagonal() * f.adjoint(),
          f * p.cast<Complex>().asDiagonal() * f.transpose()};
}

inline double rel_err(double a, double b) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-300});
}

}  // namespace wlmf::testing
