#include "wlmf/noise.hpp"

#include <cmath>
#include <sstream>

#include "wlmf/error.hpp"
#include "wlmf/rng.hpp"

namespace wlmf {
namespace {

void check_impropriety(double rho_u) {
  if (!(rho_u >= 0.0 && rho_u <= 1.0)) {
    std::ostringstream os;
    os << "impropriety " << rho_u << " outside [0, 1]";
    throw Error(ErrorKind::InvalidImpropriety, os.str());
  }
}

void check_variance(double sigma2_u) {
  if (!(sigma2_u > 0.0) || !std::isfinite(sigma2_u)) {
    throw Error(ErrorKind::InvalidConfig, "driving-noise variance must be positive");
  }
}

// E[v(n+k) v*(n)] / sigma2 and E[v(n+k) v(n)] / (rho sigma2) for lag k >= 0.
Complex lag_sum(const CVector& taps, Eigen::Index k, bool conjugate) {
  Complex acc{0.0, 0.0};
  for (Eigen::Index m = 0; m + k < taps.size(); ++m) {
    acc += taps(m + k) * (conjugate ? std::conj(taps(m)) : taps(m));
  }
  return acc;
}

}  // namespace

NoiseModel::NoiseModel(CVector taps, double rho_u, double sigma2_u)
    : taps_(std::move(taps)), rho_u_(rho_u), sigma2_u_(sigma2_u) {
  require_valid(taps_, "noise model taps");
  if (taps_.cwiseAbs().maxCoeff() == 0.0) {
    throw Error(ErrorKind::InvalidConfig, "noise model needs at least one nonzero tap");
  }
  check_impropriety(rho_u_);
  check_variance(sigma2_u_);
}

CVector NoiseModel::generate(std::size_t n, std::uint64_t seed) const {
  return ma_filter(sample_improper_white(n, rho_u_, sigma2_u_, seed), taps_);
}

CVector benchmark_ma_taps() {
  CVector taps(2);
  taps << Complex(0.9, 0.0), Complex(0.0, -0.1);
  return taps;
}

CVector sample_improper_white(std::size_t n, double rho_u, double sigma2_u, std::uint64_t seed) {
  check_impropriety(rho_u);
  check_variance(sigma2_u);
  // Uncorrelated real/imaginary parts; their power difference carries E[u^2].
  const double std_re = std::sqrt(0.5 * sigma2_u * (1.0 + rho_u));
  const double std_im = std::sqrt(0.5 * sigma2_u * (1.0 - rho_u));
  Rng rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  CVector u(static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < u.size(); ++i) {
    const double re = normal(rng);
    const double im = normal(rng);
    u(i) = Complex(std_re * re, std_im * im);
  }
  return u;
}

CVector ma_filter(const CVector& u, const CVector& taps) {
  if (u.size() == 0 || taps.size() == 0) {
    throw Error(ErrorKind::EmptyInput, "ma_filter: empty input or taps");
  }
  if (u.size() < taps.size()) {
    throw Error(ErrorKind::InsufficientSamples, "ma_filter: fewer samples than taps");
  }
  CVector v = CVector::Zero(u.size());
  for (Eigen::Index n = 0; n < u.size(); ++n) {
    for (Eigen::Index k = 0; k < taps.size() && k <= n; ++k) v(n) += taps(k) * u(n - k);
  }
  return v;
}

CovariancePair analytic_covariances(const NoiseModel& model, Eigen::Index len) {
  if (len < 1) throw Error(ErrorKind::DimensionMismatch, "analytic_covariances: L must be >= 1");
  const double s2 = model.sigma2_u();
  CovariancePair cov{CMatrix::Zero(len, len), CMatrix::Zero(len, len)};
  for (Eigen::Index k = 0; k < len; ++k) {
    const Complex r_k = s2 * lag_sum(model.taps(), k, true);
    const Complex c_k = model.rho_u() * s2 * lag_sum(model.taps(), k, false);
    for (Eigen::Index i = 0; i + k < len; ++i) {
      // r_{i,i+k} = E[v(n-i) v*(n-i-k)] = r(k)
      cov.r(i, i + k) = r_k;
      cov.r(i + k, i) = std::conj(r_k);
      cov.c(i, i + k) = c_k;
      cov.c(i + k, i) = c_k;
    }
  }
  for (Eigen::Index i = 0; i < len; ++i) cov.r(i, i) = cov.r(i, i).real();
  return cov;
}

CovariancePair empirical_covariances(const CVector& v, Eigen::Index len) {
  if (len < 1) throw Error(ErrorKind::DimensionMismatch, "empirical_covariances: L must be >= 1");
  if (v.size() < 10 * len) {
    std::ostringstream os;
    os << "empirical_covariances: need at least " << 10 * len << " samples, got " << v.size();
    throw Error(ErrorKind::InsufficientSamples, os.str());
  }
  CMatrix r = CMatrix::Zero(len, len);
  CMatrix c = CMatrix::Zero(len, len);
  CVector w(len);
  const Eigen::Index windows = v.size() - len + 1;
  for (Eigen::Index n = len - 1; n < v.size(); ++n) {
    for (Eigen::Index i = 0; i < len; ++i) w(i) = v(n - i);
    r.noalias() += w * w.adjoint();
    c.noalias() += w * w.transpose();
  }
  r /= static_cast<double>(windows);
  c /= static_cast<double>(windows);
  return {0.5 * (r + r.adjoint()), 0.5 * (c + c.transpose())};
}

}  // namespace wlmf
