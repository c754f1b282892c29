#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "edmlift/nn/network.hpp"

namespace edmlift::nn {

struct GradientCheckOptions {
  double eps = 1e-5;
  /// Coordinates probed per tensor (all of them when the tensor is smaller).
  int coords_per_tensor = 200;
  std::uint64_t seed = 7;
  Mode mode = Mode::kTrain;
  /// Dropout runs with a mask that is replayed identically on every evaluation.
  bool dropout = false;
  /// Denominator floor for the relative error. Central differences at eps = 1e-5
  /// carry ~1e-11 of rounding noise, so below this magnitude the check is in
  /// effect |analytic - numeric| <= 1e-5 * floor.
  double floor = 1e-6;
};

struct TensorCheck {
  std::string name;
  int coords = 0;
  double max_rel_error = 0.0;
  double max_abs_error = 0.0;
  /// Coordinates passed over because the +/-eps evaluations flipped a ReLU or
  /// a max-pool winner (network checks only).
  int skipped = 0;
};

struct GradientCheckReport {
  double max_rel_error = 0.0;
  std::vector<TensorCheck> tensors;
};

struct GradientCheckSample {
  BasicTensor<double> input;
  BasicTensor<double> target;
};

/// Random batch shaped for `config`: inputs uniform in [0, 2], targets uniform in [0, 1].
GradientCheckSample random_sample(const ModelConfig& config, int batch, std::uint64_t seed);

/// Central differences versus back-propagation for every trainable tensor of a
/// 64-bit network under the mean-squared loss. Network weights come from
/// `options.seed`.
GradientCheckReport gradient_check(const ModelConfig& config, const GradientCheckSample& sample,
                                   const GradientCheckOptions& options = {});

/// Same check for a single layer, including its input gradient.
GradientCheckReport check_layer_gradients(Layer<double>& layer, const BasicTensor<double>& input,
                                          const BasicTensor<double>& target,
                                          const GradientCheckOptions& options = {});

/// Finite-difference check of the loss gradient itself.
GradientCheckReport check_loss_gradient(const BasicTensor<double>& prediction,
                                        const BasicTensor<double>& target,
                                        const GradientCheckOptions& options = {});

}  // namespace edmlift::nn
