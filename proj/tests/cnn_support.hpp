#pragma once

#include <random>

#include "wlmf/cnn.hpp"

namespace wlmf::testing {

/// Random network with nonzero biases so every parameter gets exercised.
inline cnn::CnnParams random_params(cnn::ConvMode mode, std::uint64_t seed) {
  cnn::CnnConfig cfg;
  cfg.mode = mode;
  cnn::CnnParams p = cnn::CnnParams::random(cfg, seed);
  std::mt19937_64 rng(seed + 1000);
  std::normal_distribution<double> n(0.0, 0.3);
  for (Eigen::Index c = 0; c < p.channels(); ++c) {
    p.b_r(c) = n(rng);
    p.b_i(c) = n(rng);
  }
  p.b_fc = RVector::NullaryExpr(2, [&] { return n(rng); });
  return p;
}

/// True when no pre-activation sits near a ReLU kink and no pooling
/// decision is close to a tie, so central differences see a smooth loss.
inline bool kink_free(const CVector& x, const cnn::CnnParams& p, double margin) {
  const cnn::ForwardPass fp = cnn::forward(x, p);
  for (std::size_t c = 0; c < fp.conv.size(); ++c) {
    const auto ci = static_cast<Eigen::Index>(c);
    const CVector& y = fp.conv[c];
    for (Eigen::Index i = 0; i < y.size(); ++i) {
      if (std::abs(y(i).real() + p.b_r(ci)) < margin) return false;
      if (std::abs(y(i).imag() + p.b_i(ci)) < margin) return false;
    }
    const CVector& a = fp.activated[c];
    const double top = std::abs(fp.pooled[c].value);
    if (top < margin) return false;
    for (Eigen::Index i = 0; i < a.size(); ++i) {
      if (i != fp.pooled[c].index && std::abs(std::abs(a(i)) - top) < margin) return false;
    }
  }
  return true;
}

/// ||fd - analytic|| / max(||fd||, ||analytic||) with central differences.
inline double gradient_error(const cnn::LabeledSignal& s, const cnn::CnnParams& p, double h = 1e-6) {
  const RVector theta = p.flatten();
  const RVector an = cnn::backward(s, p).flatten();
  RVector fd(theta.size());
  cnn::CnnParams probe = p;
  for (Eigen::Index k = 0; k < theta.size(); ++k) {
    RVector t = theta;
    t(k) += h;
    probe.unflatten(t);
    const double up = cnn::loss(s, probe);
    t(k) -= 2.0 * h;
    probe.unflatten(t);
    const double down = cnn::loss(s, probe);
    fd(k) = (up - down) / (2.0 * h);
  }
  return (fd - an).norm() / std::max(fd.norm(), an.norm());
}

}  // namespace wlmf::testing
