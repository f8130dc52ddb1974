#include "wlmf/matched_filter.hpp"

#include <algorithm>
#include <sstream>

#include "wlmf/error.hpp"

namespace wlmf {
namespace {

void check_inputs(const CVector& x, const CovariancePair& cov, const char* what) {
  require_valid(x, what);
  require_valid(cov.r, what);
  require_valid(cov.c, what);
  if (cov.r.rows() != x.size() || cov.r.cols() != x.size() || cov.c.rows() != x.size() ||
      cov.c.cols() != x.size()) {
    std::ostringstream os;
    os << what << ": input length " << x.size() << " does not match covariance dimension "
       << cov.r.rows();
    throw Error(ErrorKind::DimensionMismatch, os.str());
  }
}

void check_scale(double s, const char* what) {
  if (!(s > 0.0)) throw Error(ErrorKind::InvalidConfig, std::string(what) + ": scale must be > 0");
}

double relative_difference(const CVector& a, const CVector& b) {
  const double scale = std::max(a.norm(), b.norm());
  return scale == 0.0 ? 0.0 : (a - b).norm() / scale;
}

}  // namespace

CVector augment(const CVector& x) {
  CVector z(2 * x.size());
  z << x, x.conjugate();
  return z;
}

CMatrix augmented_covariance(const CovariancePair& cov) {
  const Eigen::Index n = cov.dim();
  CMatrix rq(2 * n, 2 * n);
  rq << cov.r, cov.c, cov.c.conjugate(), cov.r.conjugate();
  return rq;
}

SlmfWeights slmf_solve(const CVector& x, const CovariancePair& cov, double alpha) {
  check_inputs(x, cov, "slmf_solve");
  check_scale(alpha, "slmf_solve");
  return {alpha * HermitianFactor(cov.r).solve(x), alpha};
}

double snr_slmf(const CVector& x, const CovariancePair& cov) {
  check_inputs(x, cov, "snr_slmf");
  return real_quadratic_form(x, HermitianFactor(cov.r).solve(x));
}

WlmfWeights wlmf_solve_augmented(const CVector& x, const CovariancePair& cov, double beta) {
  check_inputs(x, cov, "wlmf_solve");
  check_scale(beta, "wlmf_solve");
  const Eigen::Index n = x.size();
  const CVector w = beta * HermitianFactor(augmented_covariance(cov)).solve(augment(x));
  return {w.head(n), w.tail(n), beta, 0.0};
}

WlmfWeights wlmf_solve_block(const CVector& x, const CovariancePair& cov, double beta) {
  check_inputs(x, cov, "wlmf_solve");
  check_scale(beta, "wlmf_solve");
  const CMatrix& r = cov.r;
  const CMatrix& c = cov.c;
  const HermitianFactor r_fac(r);
  const HermitianFactor rc_fac(CMatrix(r.conjugate()));
  // f1 = beta (R - C R^{-*} C*)^{-1} (x - C R^{-*} x*)
  const CMatrix s1 = r - c * rc_fac.solve(CMatrix(c.conjugate()));
  const CVector d1 = x - c * rc_fac.solve(CVector(x.conjugate()));
  // f2 = beta (R* - C* R^{-1} C)^{-1} (x* - C* R^{-1} x)
  const CMatrix s2 = r.conjugate() - c.conjugate() * r_fac.solve(c);
  const CVector d2 = x.conjugate() - c.conjugate() * r_fac.solve(x);
  const CMatrix s1h = 0.5 * (s1 + s1.adjoint());
  const CMatrix s2h = 0.5 * (s2 + s2.adjoint());
  return {beta * HermitianFactor(s1h).solve(d1), beta * HermitianFactor(s2h).solve(d2), beta,
          0.0};
}

WlmfWeights wlmf_solve(const CVector& x, const CovariancePair& cov, double beta) {
  WlmfWeights aug = wlmf_solve_augmented(x, cov, beta);
  const WlmfWeights blk = wlmf_solve_block(x, cov, beta);
  aug.dual_path_error =
      std::max(relative_difference(aug.f1, blk.f1), relative_difference(aug.f2, blk.f2));
  return aug;
}

double snr_wlmf(const CVector& x, const CovariancePair& cov) {
  check_inputs(x, cov, "snr_wlmf");
  const CVector z = augment(x);
  return real_quadratic_form(z, HermitianFactor(augmented_covariance(cov)).solve(z));
}

double snr_gain(const CVector& x, const CovariancePair& cov) {
  check_inputs(x, cov, "snr_gain");
  return GainEvaluator(cov).gain(x);
}

GainEvaluator::GainEvaluator(const CovariancePair& cov)
    : cov_(cov),
      r_(cov.r),
      rq_(augmented_covariance(cov)),
      schur_([&] {
        const CMatrix s = cov.r.conjugate() - cov.c.conjugate() * r_.solve(cov.c);
        return CMatrix(0.5 * (s + s.adjoint()));
      }()),
      // C* R^{-1} = (R^{-1} C)^H since C^T = C and R^H = R.
      cstar_rinv_(r_.solve(cov.c).adjoint()) {}

void GainEvaluator::check_dim(const CVector& x) const {
  if (x.size() != dim()) {
    throw Error(ErrorKind::DimensionMismatch, "GainEvaluator: input length differs from L");
  }
}

double GainEvaluator::snr_slmf(const CVector& x) const {
  check_dim(x);
  return real_quadratic_form(x, r_.solve(x));
}

double GainEvaluator::snr_wlmf(const CVector& x) const {
  check_dim(x);
  const CVector z = augment(x);
  return real_quadratic_form(z, rq_.solve(z));
}

double GainEvaluator::gain(const CVector& x) const {
  check_dim(x);
  const CVector d = x.conjugate() - cstar_rinv_ * x;
  return real_quadratic_form(d, schur_.solve(d));
}

CVector window_at(const CVector& r, Eigen::Index n_p, Eigen::Index len) {
  if (len < 1 || n_p < len || n_p > r.size()) {
    std::ostringstream os;
    os << "window_at: index " << n_p << " invalid for length " << len << " over " << r.size()
       << " samples";
    throw Error(ErrorKind::InsufficientSamples, os.str());
  }
  CVector w(len);
  for (Eigen::Index i = 0; i < len; ++i) w(i) = r(n_p - 1 - i);
  return w;
}

CVector apply_filter_sequence(const CVector& r, const SlmfWeights& weights) {
  const Eigen::Index len = weights.f.size();
  if (len < 1 || r.size() < len) {
    throw Error(ErrorKind::InsufficientSamples, "apply_filter_sequence: sequence shorter than filter");
  }
  CVector y(r.size() - len + 1);
  for (Eigen::Index n_p = len; n_p <= r.size(); ++n_p) {
    y(n_p - len) = weights.f.dot(window_at(r, n_p, len));
  }
  return y;
}

CVector apply_filter_sequence(const CVector& r, const WlmfWeights& weights) {
  const Eigen::Index len = weights.f1.size();
  if (weights.f2.size() != len) {
    throw Error(ErrorKind::DimensionMismatch, "apply_filter_sequence: f1 and f2 lengths differ");
  }
  if (len < 1 || r.size() < len) {
    throw Error(ErrorKind::InsufficientSamples, "apply_filter_sequence: sequence shorter than filter");
  }
  CVector y(r.size() - len + 1);
  for (Eigen::Index n_p = len; n_p <= r.size(); ++n_p) {
    const CVector w = window_at(r, n_p, len);
    y(n_p - len) = weights.f1.dot(w) + weights.f2.dot(w.conjugate());
  }
  return y;
}

CVector template_to_feature(const CVector& x) {
  if (x.size() == 0) throw Error(ErrorKind::EmptyInput, "template_to_feature: empty template");
  return x.reverse().conjugate();
}

}  // namespace wlmf
