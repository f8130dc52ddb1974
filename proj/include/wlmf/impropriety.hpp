#pragma once

#include <cstdint>
#include <functional>
#include <string_view>
#include <vector>

#include "wlmf/linalg.hpp"
#include "wlmf/noise.hpp"

namespace wlmf {

/// Approximate uncorrelating transform of a covariance pair.
///
/// `q` is the Takagi unitary of C (C = Q diag(lambda_c) Q^T). `lambda_r`
/// holds the eigenvalues of R in descending order and is paired index-wise
/// with the descending Takagi values; this is the pairing that defines the
/// per-component impropriety rho_i = lambda_c[i] / lambda_r[i].
/// `lambda_diag` is the real diagonal of Q^H R Q, and `offdiag_residual`
/// measures how far Q is from diagonalizing R.
struct AutDecomposition {
  CMatrix q;
  RVector lambda_c;
  RVector lambda_r;
  RVector lambda_diag;
  double offdiag_residual = 0.0;

  Eigen::Index dim() const { return q.rows(); }
};

struct ImproprietyProfile {
  RVector rho;      // in [0, 1 - 1e-9]
  RVector epsilon;  // in [-1, 1]
  std::vector<Eigen::Index> zero_components;  // epsilon reported as 0 there
  int clamped = 0;  // rho entries pulled back into range
};

/// Receives warnings such as rho clamp events. Defaults to std::clog.
void set_warning_sink(std::function<void(std::string_view)> sink);

AutDecomposition aut_decompose(const CovariancePair& cov);

/// x~ = Q^H x.
CVector rotated_input(const CVector& x, const AutDecomposition& aut);

/// rho_i = p_i / lambda_i and epsilon_i = Re{x~_i^2} / |x~_i|^2.
ImproprietyProfile impropriety_profile(const AutDecomposition& aut, const CVector& rotated);

/// g(rho) = (1 + rho^2 - 2 eps rho) / (1 - rho^2).
double g_of_rho(double rho, double epsilon);
/// dg/drho = -2 (eps rho^2 - 2 rho + eps) / (1 - rho^2)^2.
double g_derivative(double rho, double epsilon);

/// Impropriety at which g(., epsilon) is smallest: 0 for epsilon <= 0,
/// (1 - sqrt(1 - eps^2)) / eps otherwise.
double lower_bound_rho(double epsilon);

/// Inverse of lower_bound_rho on [0, 1]: 2 rho / (1 + rho^2).
double epsilon_for_rho(double rho);

/// Gain predicted by the AUT: sum_i |x~_i|^2 / lambda_i * g(rho_i, eps_i).
double approx_snr_gain(const CVector& x, const AutDecomposition& aut);

/// Mean over n_p = L..N of (approx - exact) / exact on windows of x_signal.
double normalized_snr_bias(const CVector& x_signal, const CovariancePair& cov, Eigen::Index len);

/// Input whose rotated components have the given magnitudes and phases
/// theta_i = acos(eps_i) / 2 with eps_i = 2 rho_i / (1 + rho_i^2), so that the
/// AUT gain sits at its lower bound for the impropriety profile of `aut`.
CVector design_matched_sequence(const AutDecomposition& aut, const RVector& magnitudes);
/// Magnitudes drawn as |N(0, 1)| from `seed`.
CVector design_matched_sequence(const AutDecomposition& aut, std::uint64_t seed);

/// The 6-sample matched sequence listed for the MA(2) benchmark at rho_u = 0.5.
CVector reference_matched_sequence();

}  // namespace wlmf
