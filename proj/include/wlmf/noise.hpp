#pragma once

#include <cstddef>
#include <cstdint>

#include "wlmf/linalg.hpp"

namespace wlmf {

/// Second-order description of a zero-mean noise vector:
/// r = E[v v^H] (Hermitian) and c = E[v v^T] (complex symmetric).
struct CovariancePair {
  CMatrix r;
  CMatrix c;

  Eigen::Index dim() const { return r.rows(); }
};

/// MA process v(n) = sum_k taps[k] u(n-k) driven by doubly white improper
/// Gaussian u with E[|u|^2] = sigma2_u and E[u^2] = rho_u sigma2_u.
class NoiseModel {
 public:
  NoiseModel(CVector taps, double rho_u, double sigma2_u = 1.0);

  const CVector& taps() const { return taps_; }
  double rho_u() const { return rho_u_; }
  double sigma2_u() const { return sigma2_u_; }

  NoiseModel with_rho(double rho_u) const { return NoiseModel(taps_, rho_u, sigma2_u_); }

  /// n samples of v from the independent stream identified by `seed`.
  CVector generate(std::size_t n, std::uint64_t seed) const;

 private:
  CVector taps_;
  double rho_u_;
  double sigma2_u_;
};

/// Taps (0.9, -0.1j) of the MA(2) benchmark noise.
CVector benchmark_ma_taps();

CVector sample_improper_white(std::size_t n, double rho_u, double sigma2_u, std::uint64_t seed);

/// v(n) = sum_k taps[k] u(n-k) with zero initial state; output length = |u|.
CVector ma_filter(const CVector& u, const CVector& taps);

/// Exact Toeplitz covariances of L consecutive samples, window ordered
/// newest first: r_ij = E[v(n-i) v*(n-j)], c_ij = E[v(n-i) v(n-j)].
CovariancePair analytic_covariances(const NoiseModel& model, Eigen::Index len);

/// Sliding-window sample estimates of E[w w^H] and E[w w^T] with windows
/// w = (v(n), ..., v(n-L+1)), n >= L. Requires |v| >= 10 L.
CovariancePair empirical_covariances(const CVector& v, Eigen::Index len);

}  // namespace wlmf
