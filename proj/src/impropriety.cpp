#include "wlmf/impropriety.hpp"

#include <cmath>
#include <iostream>
#include <sstream>

#include "wlmf/error.hpp"
#include "wlmf/matched_filter.hpp"
#include "wlmf/rng.hpp"

namespace wlmf {
namespace {

constexpr double kRhoCeiling = 1.0 - 1e-9;

std::function<void(std::string_view)>& warning_sink() {
  static std::function<void(std::string_view)> sink = [](std::string_view msg) {
    std::clog << "warning: " << msg << '\n';
  };
  return sink;
}

void check_rho(double rho, const char* what) {
  if (rho >= 1.0) {
    std::ostringstream os;
    os << what << ": rho = " << rho << " is at or beyond the singular point 1";
    throw Error(ErrorKind::SingularAtOne, os.str());
  }
}

void check_dim(const CVector& x, const AutDecomposition& aut, const char* what) {
  if (x.size() != aut.dim()) {
    throw Error(ErrorKind::DimensionMismatch, std::string(what) + ": length differs from AUT dimension");
  }
}

}  // namespace

void set_warning_sink(std::function<void(std::string_view)> sink) {
  warning_sink() = std::move(sink);
}

AutDecomposition aut_decompose(const CovariancePair& cov) {
  require_valid(cov.r, "aut_decompose");
  if (!is_hermitian(cov.r)) throw Error(ErrorKind::NotHermitian, "aut_decompose: R not Hermitian");
  HermitianFactor{cov.r};  // PD check

  AutDecomposition aut;
  TakagiResult tk = takagi(cov.c, cov.r);
  aut.q = std::move(tk.q);
  aut.lambda_c = std::move(tk.values);
  aut.lambda_r = hermitian_eig(cov.r).values;

  const CMatrix rotated = aut.q.adjoint() * cov.r * aut.q;
  aut.lambda_diag = rotated.diagonal().real();
  CMatrix off = rotated;
  off.diagonal().setZero();
  aut.offdiag_residual = off.norm() / cov.r.norm();
  return aut;
}

CVector rotated_input(const CVector& x, const AutDecomposition& aut) {
  check_dim(x, aut, "rotated_input");
  return aut.q.adjoint() * x;
}

ImproprietyProfile impropriety_profile(const AutDecomposition& aut, const CVector& rotated) {
  check_dim(rotated, aut, "impropriety_profile");
  const Eigen::Index n = aut.dim();
  ImproprietyProfile prof{RVector(n), RVector(n), {}, 0};
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!(aut.lambda_r(i) > 0.0)) {
      throw Error(ErrorKind::NotPositiveDefinite, "impropriety_profile: non-positive lambda_r");
    }
    double rho = aut.lambda_c(i) / aut.lambda_r(i);
    if (rho > kRhoCeiling) {
      std::ostringstream os;
      os << "rho[" << i << "] = " << rho << " clamped to " << kRhoCeiling;
      warning_sink()(os.str());
      rho = kRhoCeiling;
      ++prof.clamped;
    }
    prof.rho(i) = std::max(rho, 0.0);

    const double power = std::norm(rotated(i));
    if (power == 0.0) {
      prof.epsilon(i) = 0.0;
      prof.zero_components.push_back(i);
    } else {
      prof.epsilon(i) = std::clamp((rotated(i) * rotated(i)).real() / power, -1.0, 1.0);
    }
  }
  return prof;
}

double g_of_rho(double rho, double epsilon) {
  check_rho(rho, "g_of_rho");
  return (1.0 + rho * rho - 2.0 * epsilon * rho) / (1.0 - rho * rho);
}

double g_derivative(double rho, double epsilon) {
  check_rho(rho, "g_derivative");
  const double d = 1.0 - rho * rho;
  return -2.0 * (epsilon * rho * rho - 2.0 * rho + epsilon) / (d * d);
}

double lower_bound_rho(double epsilon) {
  if (epsilon <= 0.0) return 0.0;
  const double e = std::min(epsilon, 1.0);
  // Same root as (1 - sqrt(1 - e^2)) / e, without cancellation for small e.
  return e / (1.0 + std::sqrt(1.0 - e * e));
}

double epsilon_for_rho(double rho) { return 2.0 * rho / (1.0 + rho * rho); }

double approx_snr_gain(const CVector& x, const AutDecomposition& aut) {
  check_dim(x, aut, "approx_snr_gain");
  const CVector xr = rotated_input(x, aut);
  double total = 0.0;
  for (Eigen::Index i = 0; i < aut.dim(); ++i) {
    const double lambda = aut.lambda_r(i);
    if (!(lambda > 0.0)) {
      throw Error(ErrorKind::NotPositiveDefinite, "approx_snr_gain: non-positive lambda_r");
    }
    const double power = std::norm(xr(i));
    if (power == 0.0) continue;
    const double rho = aut.lambda_c(i) / lambda;
    const double eps = std::clamp((xr(i) * xr(i)).real() / power, -1.0, 1.0);
    total += power / lambda * g_of_rho(rho, eps);
  }
  return total;
}

double normalized_snr_bias(const CVector& x_signal, const CovariancePair& cov, Eigen::Index len) {
  if (len < 1 || x_signal.size() < len) {
    throw Error(ErrorKind::InsufficientSamples, "normalized_snr_bias: signal shorter than L");
  }
  if (cov.dim() != len) {
    throw Error(ErrorKind::DimensionMismatch, "normalized_snr_bias: covariance dimension differs from L");
  }
  const GainEvaluator exact(cov);
  const AutDecomposition aut = aut_decompose(cov);
  double acc = 0.0;
  for (Eigen::Index n_p = len; n_p <= x_signal.size(); ++n_p) {
    const CVector w = window_at(x_signal, n_p, len);
    const double g = exact.gain(w);
    if (g < 1e-14) {
      std::ostringstream os;
      os << "normalized_snr_bias: exact gain " << g << " at n_p = " << n_p;
      throw Error(ErrorKind::DegenerateWindow, os.str());
    }
    acc += (approx_snr_gain(w, aut) - g) / g;
  }
  return acc / static_cast<double>(x_signal.size() - len + 1);
}

CVector design_matched_sequence(const AutDecomposition& aut, const RVector& magnitudes) {
  if (magnitudes.size() != aut.dim()) {
    throw Error(ErrorKind::DimensionMismatch, "design_matched_sequence: magnitudes length differs from L");
  }
  if (!(magnitudes.minCoeff() > 0.0)) {
    throw Error(ErrorKind::InvalidConfig, "design_matched_sequence: magnitudes must be positive");
  }
  // Only rho is needed; a dummy rotated input keeps the clamping rules shared.
  const ImproprietyProfile prof = impropriety_profile(aut, CVector::Ones(aut.dim()));
  CVector rotated(aut.dim());
  for (Eigen::Index i = 0; i < aut.dim(); ++i) {
    const double theta = 0.5 * std::acos(std::clamp(epsilon_for_rho(prof.rho(i)), -1.0, 1.0));
    rotated(i) = std::polar(magnitudes(i), theta);
  }
  return aut.q * rotated;
}

CVector design_matched_sequence(const AutDecomposition& aut, std::uint64_t seed) {
  Rng rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  RVector mags(aut.dim());
  for (Eigen::Index i = 0; i < mags.size(); ++i) {
    double m = 0.0;
    while (m == 0.0) m = std::abs(normal(rng));
    mags(i) = m;
  }
  return design_matched_sequence(aut, mags);
}

CVector reference_matched_sequence() {
  CVector x(6);
  x << Complex(0.77, 0.13), Complex(0.71, 0.25), Complex(-0.91, -0.33), Complex(-0.87, -0.07),
      Complex(-1.65, -0.62), Complex(0.74, 0.27);
  return x;
}

}  // namespace wlmf
