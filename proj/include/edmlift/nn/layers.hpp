#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "edmlift/core/random.hpp"
#include "edmlift/nn/tensor.hpp"

namespace edmlift::nn {

using edmlift::Rng;

enum class Mode { kTrain, kInfer };

/// Per-call forward settings. Dropout is active only in train mode with
/// `dropout` set; batch norm uses batch statistics only in train mode.
struct ForwardContext {
  Mode mode = Mode::kInfer;
  bool dropout = true;
  Rng* rng = nullptr;
};

/// Whatever a layer needs from its forward pass to run backward.
template <typename T>
struct LayerCache {
  BasicTensor<T> input;
  BasicTensor<T> aux;
  BasicTensor<T> aux2;
  std::vector<std::int32_t> indices;
};

/// A named tensor owned by a layer. `grad` is null for buffers (running statistics).
template <typename T>
struct ParamSlot {
  std::string name;
  BasicTensor<T>* value = nullptr;
  BasicTensor<T>* grad = nullptr;

  bool trainable() const { return grad != nullptr; }
};

/// Layers operate on batches: axis 0 of every tensor is the sample index.
/// Forward is const so inference is reentrant; train-mode side effects go
/// through `update_buffers`.
template <typename T>
class Layer {
 public:
  explicit Layer(std::string name) : name_(std::move(name)) {}
  virtual ~Layer() = default;
  Layer(const Layer&) = delete;
  Layer& operator=(const Layer&) = delete;

  const std::string& name() const { return name_; }
  virtual std::string kind() const = 0;
  /// Output shape for one sample (no batch axis).
  virtual Shape output_shape(const Shape& sample) const = 0;

  virtual BasicTensor<T> forward(const BasicTensor<T>& x, const ForwardContext& ctx,
                                 LayerCache<T>* cache) const = 0;
  /// Accumulates parameter gradients and returns the gradient w.r.t. the input.
  virtual BasicTensor<T> backward(const BasicTensor<T>& grad_out, const LayerCache<T>& cache) = 0;

  virtual void update_buffers(const LayerCache<T>& cache) {}
  virtual std::vector<ParamSlot<T>> slots() { return {}; }
  /// He initialization of weights; biases and shifts to zero.
  virtual void initialize(Rng& rng) {}

  /// Skip computing the input gradient (first layer of a network).
  void set_input_grad(bool enabled) { input_grad_ = enabled; }
  bool input_grad() const { return input_grad_; }

 private:
  std::string name_;
  bool input_grad_ = true;
};

/// y = x W^T + b. x: [B, in].
template <typename T>
class Linear final : public Layer<T> {
 public:
  Linear(std::string name, int in_features, int out_features);
  std::string kind() const override { return "linear"; }
  Shape output_shape(const Shape& sample) const override;
  BasicTensor<T> forward(const BasicTensor<T>& x, const ForwardContext& ctx,
                         LayerCache<T>* cache) const override;
  BasicTensor<T> backward(const BasicTensor<T>& grad_out, const LayerCache<T>& cache) override;
  std::vector<ParamSlot<T>> slots() override;
  void initialize(Rng& rng) override;

 private:
  int in_;
  int out_;
  BasicTensor<T> weight_, bias_, weight_grad_, bias_grad_;
};

template <typename T>
class Relu final : public Layer<T> {
 public:
  using Layer<T>::Layer;
  std::string kind() const override { return "relu"; }
  Shape output_shape(const Shape& sample) const override { return sample; }
  BasicTensor<T> forward(const BasicTensor<T>& x, const ForwardContext& ctx,
                         LayerCache<T>* cache) const override;
  BasicTensor<T> backward(const BasicTensor<T>& grad_out, const LayerCache<T>& cache) override;
};

/// Inverted dropout: kept activations are scaled by 1 / (1 - rate) at train time.
template <typename T>
class Dropout final : public Layer<T> {
 public:
  Dropout(std::string name, double rate);
  std::string kind() const override { return "dropout"; }
  Shape output_shape(const Shape& sample) const override { return sample; }
  BasicTensor<T> forward(const BasicTensor<T>& x, const ForwardContext& ctx,
                         LayerCache<T>* cache) const override;
  BasicTensor<T> backward(const BasicTensor<T>& grad_out, const LayerCache<T>& cache) override;
  double rate() const { return rate_; }

 private:
  double rate_;
};

/// Stride-1 square convolution with symmetric zero padding of kernel/2. x: [B, C, H, W].
template <typename T>
class Conv2d final : public Layer<T> {
 public:
  Conv2d(std::string name, int in_channels, int out_channels, int kernel);
  std::string kind() const override { return kernel_ == 1 ? "conv1x1" : "conv"; }
  Shape output_shape(const Shape& sample) const override;
  BasicTensor<T> forward(const BasicTensor<T>& x, const ForwardContext& ctx,
                         LayerCache<T>* cache) const override;
  BasicTensor<T> backward(const BasicTensor<T>& grad_out, const LayerCache<T>& cache) override;
  std::vector<ParamSlot<T>> slots() override;
  void initialize(Rng& rng) override;

 private:
  int cin_, cout_, kernel_, pad_;
  BasicTensor<T> weight_, bias_, weight_grad_, bias_grad_;
};

/// Per-channel batch normalization over (B, H, W) with learned scale/shift.
template <typename T>
class BatchNorm2d final : public Layer<T> {
 public:
  BatchNorm2d(std::string name, int channels, double eps = 1e-5, double momentum = 0.1);
  std::string kind() const override { return "batchnorm"; }
  Shape output_shape(const Shape& sample) const override { return sample; }
  BasicTensor<T> forward(const BasicTensor<T>& x, const ForwardContext& ctx,
                         LayerCache<T>* cache) const override;
  BasicTensor<T> backward(const BasicTensor<T>& grad_out, const LayerCache<T>& cache) override;
  void update_buffers(const LayerCache<T>& cache) override;
  std::vector<ParamSlot<T>> slots() override;
  void initialize(Rng& rng) override;

 private:
  int channels_;
  double eps_;
  double momentum_;
  BasicTensor<T> gamma_, beta_, gamma_grad_, beta_grad_, running_mean_, running_var_;
};

/// 2x2 max pooling, stride 2, ceil mode (odd edges pool over a partial window).
template <typename T>
class MaxPool2d final : public Layer<T> {
 public:
  using Layer<T>::Layer;
  std::string kind() const override { return "maxpool"; }
  Shape output_shape(const Shape& sample) const override;
  BasicTensor<T> forward(const BasicTensor<T>& x, const ForwardContext& ctx,
                         LayerCache<T>* cache) const override;
  BasicTensor<T> backward(const BasicTensor<T>& grad_out, const LayerCache<T>& cache) override;
};

/// Nearest-neighbour x2 upsampling cropped (top-left) to a fixed output size.
template <typename T>
class Upsample2x final : public Layer<T> {
 public:
  Upsample2x(std::string name, int out_height, int out_width);
  std::string kind() const override { return "upsample"; }
  Shape output_shape(const Shape& sample) const override;
  BasicTensor<T> forward(const BasicTensor<T>& x, const ForwardContext& ctx,
                         LayerCache<T>* cache) const override;
  BasicTensor<T> backward(const BasicTensor<T>& grad_out, const LayerCache<T>& cache) override;

 private:
  int out_h_, out_w_;
};

/// (Z + Z^T) / 2 on every channel of a square map.
template <typename T>
class MatrixSymmetrize final : public Layer<T> {
 public:
  using Layer<T>::Layer;
  std::string kind() const override { return "symmetrize"; }
  Shape output_shape(const Shape& sample) const override { return sample; }
  BasicTensor<T> forward(const BasicTensor<T>& x, const ForwardContext& ctx,
                         LayerCache<T>* cache) const override;
  BasicTensor<T> backward(const BasicTensor<T>& grad_out, const LayerCache<T>& cache) override;
};

/// Mean over all entries of (prediction - target)^2, and its gradient.
template <typename T>
struct LossResult {
  double loss = 0.0;
  BasicTensor<T> grad;
};

template <typename T>
LossResult<T> mse_loss(const BasicTensor<T>& prediction, const BasicTensor<T>& target);

}  // namespace edmlift::nn
