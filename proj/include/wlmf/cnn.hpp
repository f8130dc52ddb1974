#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "wlmf/linalg.hpp"

namespace wlmf::cnn {

enum class ConvMode { StrictlyLinear, WidelyLinear };

std::string_view to_string(ConvMode mode);
ConvMode parse_mode(std::string_view text);

struct CnnConfig {
  Eigen::Index input_len = 8;
  Eigen::Index channels = 3;
  Eigen::Index filter_len = 3;
  ConvMode mode = ConvMode::StrictlyLinear;
  double learning_rate = 0.05;
  int epochs = 10;
  int realizations_per_epoch = 200;
  int holdout_size = 100;

  void validate() const;
};

/// Convolution taps per channel (g2 is empty in SL mode), split-ReLU biases,
/// and the real head mapping (Re p_0..Re p_{C-1}, Im p_0..Im p_{C-1}) to two
/// logits. Also used as the gradient record.
struct CnnParams {
  ConvMode mode = ConvMode::StrictlyLinear;
  std::vector<CVector> g1;
  std::vector<CVector> g2;
  RVector b_r;
  RVector b_i;
  RMatrix w_fc;
  RVector b_fc;

  Eigen::Index channels() const { return static_cast<Eigen::Index>(g1.size()); }
  Eigen::Index filter_len() const { return g1.empty() ? 0 : g1.front().size(); }
  /// Real parameters in the convolution taps.
  Eigen::Index conv_param_count() const;

  static CnnParams zeros_like(const CnnParams& other);
  /// Taps and head weights ~ N(0, 0.5^2) per real component, biases 0.
  /// g1 and the head depend only on `seed`, so SL and WL nets built from the
  /// same seed share them; g2 comes from a separate stream.
  static CnnParams random(const CnnConfig& config, std::uint64_t seed);

  RVector flatten() const;
  void unflatten(const RVector& values);
};

struct LabeledSignal {
  CVector x;
  std::array<double, 2> target{};
  int label = 0;              // 0 -> pattern 1, 1 -> pattern 2
  Eigen::Index start = 0;     // first sample of the embedded pattern
};

struct DatasetOptions {
  double uniform_amplitude = 0.3;  // Re/Im of v and of background ~ U[0, a]
  double gaussian_std = 0.05;      // complex std of the circular Gaussian term
  bool normalize = true;
  bool balanced = false;           // alternate labels instead of drawing them
  Eigen::Index input_len = 8;
};

CVector pattern(int label);

std::vector<LabeledSignal> make_dataset(std::size_t count, std::uint64_t seed,
                                        const DatasetOptions& options = {});

/// One output sequence per channel, length N - filter_len + 1. Windows are
/// newest-first as in apply_filter_sequence.
std::vector<CVector> conv_forward(const CVector& x, const CnnParams& params);

CVector split_relu(const CVector& y, double b_r, double b_i);

struct Pooled {
  Complex value;
  Eigen::Index index = 0;
};

/// Largest modulus, ties to the smallest index.
Pooled max_modulus_pool(const CVector& y);

std::array<double, 2> head_forward(const std::vector<Complex>& pooled, const CnnParams& params);

struct ForwardPass {
  std::vector<CVector> conv;
  std::vector<CVector> activated;
  std::vector<Pooled> pooled;
  std::array<double, 2> probabilities{};
};

ForwardPass forward(const CVector& x, const CnnParams& params);

/// Cross-entropy loss of one sample.
double loss(const LabeledSignal& sample, const CnnParams& params);

/// Gradient of the cross-entropy loss with respect to every parameter,
/// each complex tap treated as an independent (Re, Im) pair.
CnnParams backward(const LabeledSignal& sample, const CnnParams& params);

struct TracePoint {
  int iteration = 0;
  /// Mean correct-class probability on the held-out batch, per pattern.
  std::array<double, 2> probability{};
};

struct TrainResult {
  CnnParams params;
  std::vector<TracePoint> trace;
  /// First iteration from which both per-pattern means stay above 0.9.
  std::optional<int> sustained_correct_iteration;
};

/// Per-sample SGD over epochs x realizations. The training stream, held-out
/// batch and initialization depend only on `seed`, not on the mode.
TrainResult train(const CnnConfig& config, std::uint64_t seed);

}  // namespace wlmf::cnn
