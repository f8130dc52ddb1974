#include "wlmf/cnn.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include "wlmf/error.hpp"
#include "wlmf/matched_filter.hpp"
#include "wlmf/rng.hpp"

namespace wlmf::cnn {
namespace {

constexpr double kInitStd = 0.5;
constexpr double kSustainedThreshold = 0.9;

// Stream ids under the master seed.
enum : std::uint64_t { kTrainData = 1, kHoldout = 2, kInitShared = 3, kInitConjugate = 4, kShuffle = 5 };

CVector random_taps(Eigen::Index n, Rng& rng) {
  std::normal_distribution<double> normal(0.0, kInitStd);
  CVector g(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double re = normal(rng);
    const double im = normal(rng);
    g(i) = Complex(re, im);
  }
  return g;
}

std::array<double, 2> softmax(double a, double b) {
  const double m = std::max(a, b);
  const double ea = std::exp(a - m);
  const double eb = std::exp(b - m);
  return {ea / (ea + eb), eb / (ea + eb)};
}

double mean_correct_probability(const std::vector<LabeledSignal>& batch, const CnnParams& params,
                                int label) {
  double sum = 0.0;
  int count = 0;
  for (const auto& s : batch) {
    if (s.label != label) continue;
    sum += forward(s.x, params).probabilities[static_cast<std::size_t>(label)];
    ++count;
  }
  return count == 0 ? 0.0 : sum / count;
}

}  // namespace

std::string_view to_string(ConvMode mode) {
  return mode == ConvMode::StrictlyLinear ? "SL" : "WL";
}

ConvMode parse_mode(std::string_view text) {
  if (text == "SL" || text == "sl") return ConvMode::StrictlyLinear;
  if (text == "WL" || text == "wl") return ConvMode::WidelyLinear;
  throw Error(ErrorKind::InvalidConfig, "unknown convolution mode '" + std::string(text) + "'");
}

void CnnConfig::validate() const {
  if (channels < 1) throw Error(ErrorKind::InvalidConfig, "cnn: channels must be >= 1");
  if (filter_len < 1 || filter_len > input_len) {
    throw Error(ErrorKind::InvalidConfig, "cnn: filter length must lie in [1, input length]");
  }
  if (input_len < 3) throw Error(ErrorKind::InvalidConfig, "cnn: input must hold a 3-sample pattern");
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) {
    throw Error(ErrorKind::InvalidConfig, "cnn: learning rate must be finite and >= 0");
  }
  if (epochs < 0 || realizations_per_epoch < 1 || holdout_size < 2) {
    throw Error(ErrorKind::InvalidConfig, "cnn: invalid epoch/realization/holdout counts");
  }
}

Eigen::Index CnnParams::conv_param_count() const {
  Eigen::Index n = 0;
  for (const auto& g : g1) n += 2 * g.size();
  for (const auto& g : g2) n += 2 * g.size();
  return n;
}

CnnParams CnnParams::zeros_like(const CnnParams& other) {
  CnnParams z;
  z.mode = other.mode;
  for (const auto& g : other.g1) z.g1.push_back(CVector::Zero(g.size()));
  for (const auto& g : other.g2) z.g2.push_back(CVector::Zero(g.size()));
  z.b_r = RVector::Zero(other.b_r.size());
  z.b_i = RVector::Zero(other.b_i.size());
  z.w_fc = RMatrix::Zero(other.w_fc.rows(), other.w_fc.cols());
  z.b_fc = RVector::Zero(other.b_fc.size());
  return z;
}

CnnParams CnnParams::random(const CnnConfig& config, std::uint64_t seed) {
  config.validate();
  CnnParams p;
  p.mode = config.mode;
  Rng shared = make_rng(seed, kInitShared);
  Rng conj_stream = make_rng(seed, kInitConjugate);
  for (Eigen::Index c = 0; c < config.channels; ++c) {
    p.g1.push_back(random_taps(config.filter_len, shared));
    if (config.mode == ConvMode::WidelyLinear) p.g2.push_back(random_taps(config.filter_len, conj_stream));
  }
  p.b_r = RVector::Zero(config.channels);
  p.b_i = RVector::Zero(config.channels);
  std::normal_distribution<double> normal(0.0, kInitStd);
  p.w_fc = RMatrix(2, 2 * config.channels);
  for (Eigen::Index r = 0; r < 2; ++r) {
    for (Eigen::Index c = 0; c < 2 * config.channels; ++c) p.w_fc(r, c) = normal(shared);
  }
  p.b_fc = RVector::Zero(2);
  return p;
}

RVector CnnParams::flatten() const {
  std::vector<double> v;
  auto push_taps = [&](const std::vector<CVector>& taps) {
    for (const auto& g : taps) {
      for (Eigen::Index i = 0; i < g.size(); ++i) {
        v.push_back(g(i).real());
        v.push_back(g(i).imag());
      }
    }
  };
  push_taps(g1);
  push_taps(g2);
  v.insert(v.end(), b_r.data(), b_r.data() + b_r.size());
  v.insert(v.end(), b_i.data(), b_i.data() + b_i.size());
  for (Eigen::Index r = 0; r < w_fc.rows(); ++r) {
    for (Eigen::Index c = 0; c < w_fc.cols(); ++c) v.push_back(w_fc(r, c));
  }
  v.insert(v.end(), b_fc.data(), b_fc.data() + b_fc.size());
  return Eigen::Map<RVector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

void CnnParams::unflatten(const RVector& values) {
  if (values.size() != flatten().size()) {
    throw Error(ErrorKind::DimensionMismatch, "CnnParams::unflatten: wrong parameter count");
  }
  Eigen::Index k = 0;
  auto pull_taps = [&](std::vector<CVector>& taps) {
    for (auto& g : taps) {
      for (Eigen::Index i = 0; i < g.size(); ++i, k += 2) g(i) = Complex(values(k), values(k + 1));
    }
  };
  pull_taps(g1);
  pull_taps(g2);
  for (Eigen::Index i = 0; i < b_r.size(); ++i) b_r(i) = values(k++);
  for (Eigen::Index i = 0; i < b_i.size(); ++i) b_i(i) = values(k++);
  for (Eigen::Index r = 0; r < w_fc.rows(); ++r) {
    for (Eigen::Index c = 0; c < w_fc.cols(); ++c) w_fc(r, c) = values(k++);
  }
  for (Eigen::Index i = 0; i < b_fc.size(); ++i) b_fc(i) = values(k++);
}

CVector pattern(int label) {
  CVector p(3);
  if (label == 0) {
    p << Complex(-0.5, -1.0), Complex(1.0, -1.0), Complex(-0.5, -1.0);
  } else if (label == 1) {
    p << Complex(1.0, 1.0), Complex(1.0, 1.0), Complex(1.0, 1.0);
  } else {
    throw Error(ErrorKind::InvalidConfig, "pattern label must be 0 or 1");
  }
  return p;
}

std::vector<LabeledSignal> make_dataset(std::size_t count, std::uint64_t seed,
                                        const DatasetOptions& options) {
  const Eigen::Index n = options.input_len;
  if (n < 3) throw Error(ErrorKind::InvalidConfig, "make_dataset: input length below pattern length");
  Rng rng(seed);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_int_distribution<Eigen::Index> start_dist(0, n - 3);
  std::bernoulli_distribution coin(0.5);
  const double gauss = options.gaussian_std / std::sqrt(2.0);

  std::vector<LabeledSignal> out;
  out.reserve(count);
  for (std::size_t s = 0; s < count; ++s) {
    LabeledSignal sig;
    sig.label = options.balanced ? static_cast<int>(s % 2) : (coin(rng) ? 1 : 0);
    sig.target = sig.label == 0 ? std::array<double, 2>{1.0, 0.0} : std::array<double, 2>{0.0, 1.0};
    sig.start = start_dist(rng);
    sig.x = CVector(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const double re = uniform(rng);
      const double im = uniform(rng);
      sig.x(i) = options.uniform_amplitude * Complex(re, im);
    }
    const CVector p = pattern(sig.label);
    for (Eigen::Index k = 0; k < 3; ++k) sig.x(sig.start + k) += p(k);
    for (Eigen::Index i = 0; i < n; ++i) {
      const double re = normal(rng);
      const double im = normal(rng);
      sig.x(i) += gauss * Complex(re, im);
    }
    if (options.normalize) sig.x /= sig.x.norm();
    out.push_back(std::move(sig));
  }
  return out;
}

std::vector<CVector> conv_forward(const CVector& x, const CnnParams& params) {
  const Eigen::Index taps = params.filter_len();
  if (taps < 1 || x.size() < taps) {
    throw Error(ErrorKind::DimensionMismatch, "conv_forward: input shorter than the filters");
  }
  const bool wl = params.mode == ConvMode::WidelyLinear;
  if (wl && params.g2.size() != params.g1.size()) {
    throw Error(ErrorKind::DimensionMismatch, "conv_forward: WL mode needs one g2 per channel");
  }
  std::vector<CVector> out;
  out.reserve(params.g1.size());
  for (std::size_t c = 0; c < params.g1.size(); ++c) {
    if (params.g1[c].size() != taps || (wl && params.g2[c].size() != taps)) {
      throw Error(ErrorKind::DimensionMismatch, "conv_forward: channel filter lengths differ");
    }
    if (wl) {
      out.push_back(apply_filter_sequence(x, WlmfWeights{params.g1[c], params.g2[c], 1.0, 0.0}));
    } else {
      out.push_back(apply_filter_sequence(x, SlmfWeights{params.g1[c], 1.0}));
    }
  }
  return out;
}

CVector split_relu(const CVector& y, double b_r, double b_i) {
  CVector a(y.size());
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    a(i) = Complex(std::max(0.0, y(i).real() + b_r), std::max(0.0, y(i).imag() + b_i));
  }
  return a;
}

Pooled max_modulus_pool(const CVector& y) {
  if (y.size() == 0) throw Error(ErrorKind::EmptyInput, "max_modulus_pool: empty sequence");
  Pooled best{y(0), 0};
  double best_mod = std::abs(y(0));
  for (Eigen::Index i = 1; i < y.size(); ++i) {
    const double m = std::abs(y(i));
    if (m > best_mod) {
      best = {y(i), i};
      best_mod = m;
    }
  }
  return best;
}

std::array<double, 2> head_forward(const std::vector<Complex>& pooled, const CnnParams& params) {
  const auto c = static_cast<Eigen::Index>(pooled.size());
  if (params.w_fc.rows() != 2 || params.w_fc.cols() != 2 * c || params.b_fc.size() != 2) {
    throw Error(ErrorKind::DimensionMismatch, "head_forward: head shape does not match channels");
  }
  RVector features(2 * c);
  for (Eigen::Index i = 0; i < c; ++i) {
    features(i) = pooled[static_cast<std::size_t>(i)].real();
    features(c + i) = pooled[static_cast<std::size_t>(i)].imag();
  }
  const RVector logits = params.w_fc * features + params.b_fc;
  return softmax(logits(0), logits(1));
}

ForwardPass forward(const CVector& x, const CnnParams& params) {
  ForwardPass fp;
  fp.conv = conv_forward(x, params);
  std::vector<Complex> pooled_values;
  for (std::size_t c = 0; c < fp.conv.size(); ++c) {
    const auto ci = static_cast<Eigen::Index>(c);
    fp.activated.push_back(split_relu(fp.conv[c], params.b_r(ci), params.b_i(ci)));
    fp.pooled.push_back(max_modulus_pool(fp.activated.back()));
    pooled_values.push_back(fp.pooled.back().value);
  }
  fp.probabilities = head_forward(pooled_values, params);
  return fp;
}

double loss(const LabeledSignal& sample, const CnnParams& params) {
  const auto p = forward(sample.x, params).probabilities;
  double l = 0.0;
  for (std::size_t k = 0; k < 2; ++k) {
    if (sample.target[k] != 0.0) l -= sample.target[k] * std::log(p[k]);
  }
  return l;
}

CnnParams backward(const LabeledSignal& sample, const CnnParams& params) {
  const ForwardPass fp = forward(sample.x, params);
  const Eigen::Index channels = params.channels();
  const Eigen::Index taps = params.filter_len();
  CnnParams grad = CnnParams::zeros_like(params);

  RVector features(2 * channels);
  for (Eigen::Index c = 0; c < channels; ++c) {
    features(c) = fp.pooled[static_cast<std::size_t>(c)].value.real();
    features(channels + c) = fp.pooled[static_cast<std::size_t>(c)].value.imag();
  }
  Eigen::Vector2d dlogits(fp.probabilities[0] - sample.target[0],
                          fp.probabilities[1] - sample.target[1]);
  grad.w_fc = dlogits * features.transpose();
  grad.b_fc = dlogits;
  const RVector dfeatures = params.w_fc.transpose() * dlogits;

  for (Eigen::Index c = 0; c < channels; ++c) {
    const auto cs = static_cast<std::size_t>(c);
    const Eigen::Index k = fp.pooled[cs].index;
    const Complex pre = fp.conv[cs](k);
    // Pooling routes everything to the argmax; ReLU subgradient at 0 is 0.
    const double d_re = (pre.real() + params.b_r(c) > 0.0) ? dfeatures(c) : 0.0;
    const double d_im = (pre.imag() + params.b_i(c) > 0.0) ? dfeatures(channels + c) : 0.0;
    grad.b_r(c) = d_re;
    grad.b_i(c) = d_im;
    if (d_re == 0.0 && d_im == 0.0) continue;

    const CVector w = window_at(sample.x, k + taps, taps);
    for (Eigen::Index i = 0; i < taps; ++i) {
      const double u = w(i).real();
      const double v = w(i).imag();
      // conj(g) w: Re = a u + b v, Im = a v - b u
      grad.g1[cs](i) = Complex(d_re * u + d_im * v, d_re * v - d_im * u);
      if (params.mode == ConvMode::WidelyLinear) {
        // conj(g2) conj(w): Re = a u - b v, Im = -a v - b u
        grad.g2[cs](i) = Complex(d_re * u - d_im * v, -d_re * v - d_im * u);
      }
    }
  }
  return grad;
}

TrainResult train(const CnnConfig& config, std::uint64_t seed) {
  config.validate();
  DatasetOptions opts;
  opts.input_len = config.input_len;
  const auto train_set =
      make_dataset(static_cast<std::size_t>(config.realizations_per_epoch), derive_seed(seed, kTrainData), opts);
  DatasetOptions holdout_opts = opts;
  holdout_opts.balanced = true;
  const auto holdout =
      make_dataset(static_cast<std::size_t>(config.holdout_size), derive_seed(seed, kHoldout), holdout_opts);

  TrainResult result;
  result.params = CnnParams::random(config, seed);
  RVector theta = result.params.flatten();
  Rng shuffle_rng = make_rng(seed, kShuffle);
  std::vector<std::size_t> order(train_set.size());

  int iteration = 0;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    for (std::size_t idx : order) {
      const LabeledSignal& sample = train_set[idx];
      const double l = loss(sample, result.params);
      if (!std::isfinite(l)) {
        std::ostringstream os;
        os << "train: non-finite loss at iteration " << iteration + 1;
        throw Error(ErrorKind::DivergenceDetected, os.str());
      }
      theta -= config.learning_rate * backward(sample, result.params).flatten();
      result.params.unflatten(theta);
      ++iteration;
      result.trace.push_back({iteration,
                              {mean_correct_probability(holdout, result.params, 0),
                               mean_correct_probability(holdout, result.params, 1)}});
    }
  }

  for (auto it = result.trace.rbegin(); it != result.trace.rend(); ++it) {
    if (it->probability[0] > kSustainedThreshold && it->probability[1] > kSustainedThreshold) {
      result.sustained_correct_iteration = it->iteration;
    } else {
      break;
    }
  }
  return result;
}

}  // namespace wlmf::cnn
