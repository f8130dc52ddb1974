#pragma once

#include "wlmf/linalg.hpp"
#include "wlmf/noise.hpp"

namespace wlmf {

/// f = alpha R^{-1} x.
struct SlmfWeights {
  CVector f;
  double alpha = 1.0;
};

/// Conjugate pair (f1, f2) acting on r and conj(r); w = (f1; f2) = beta R_q^{-1} z.
struct WlmfWeights {
  CVector f1;
  CVector f2;
  double beta = 1.0;
  /// Relative difference between the augmented and block-inverse solutions.
  double dual_path_error = 0.0;
};

/// z = (x; conj(x)).
CVector augment(const CVector& x);

/// R_q = [[R, C], [conj(C), conj(R)]].
CMatrix augmented_covariance(const CovariancePair& cov);

SlmfWeights slmf_solve(const CVector& x, const CovariancePair& cov, double alpha = 1.0);
double snr_slmf(const CVector& x, const CovariancePair& cov);

/// Augmented solve w = beta R_q^{-1} z.
WlmfWeights wlmf_solve_augmented(const CVector& x, const CovariancePair& cov, double beta = 1.0);
/// Block solve through the Schur complements of R_q.
WlmfWeights wlmf_solve_block(const CVector& x, const CovariancePair& cov, double beta = 1.0);
/// Runs both routes and records their discrepancy; returns the augmented one.
WlmfWeights wlmf_solve(const CVector& x, const CovariancePair& cov, double beta = 1.0);

double snr_wlmf(const CVector& x, const CovariancePair& cov);

/// SNR_WLMF - SNR_SLMF evaluated as the Schur-complement quadratic form
/// (x* - C* R^{-1} x)^H (R* - C* R^{-1} C)^{-1} (x* - C* R^{-1} x).
double snr_gain(const CVector& x, const CovariancePair& cov);

/// Factors R, R_q and the Schur complement once so that SNRs of many input
/// windows under the same noise statistics are cheap.
class GainEvaluator {
 public:
  explicit GainEvaluator(const CovariancePair& cov);

  Eigen::Index dim() const { return cov_.dim(); }
  double snr_slmf(const CVector& x) const;
  double snr_wlmf(const CVector& x) const;
  double gain(const CVector& x) const;

 private:
  void check_dim(const CVector& x) const;

  CovariancePair cov_;
  HermitianFactor r_;
  HermitianFactor rq_;
  HermitianFactor schur_;  // R* - C* R^{-1} C
  CMatrix cstar_rinv_;     // C* R^{-1}
};

/// Newest-first window (r(n_p), r(n_p-1), ..., r(n_p-L+1)); n_p is 1-based.
CVector window_at(const CVector& r, Eigen::Index n_p, Eigen::Index len);

/// y(n_p) = f^H r_window for n_p = L..N; element 0 corresponds to n_p = L.
CVector apply_filter_sequence(const CVector& r, const SlmfWeights& weights);
/// y(n_p) = f1^H r_window + f2^H conj(r_window).
CVector apply_filter_sequence(const CVector& r, const WlmfWeights& weights);

/// Time-reversed conjugate, x_c[k] = conj(x[L-1-k]). An involution.
CVector template_to_feature(const CVector& x);

}  // namespace wlmf
