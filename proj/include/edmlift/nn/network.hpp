#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "edmlift/core/distance_matrix.hpp"
#include "edmlift/nn/layers.hpp"

namespace edmlift::nn {

enum class Arch { kFconn, kFconv };

std::string_view to_string(Arch arch);
Arch parse_arch(std::string_view text);

struct ModelConfig {
  Arch arch = Arch::kFconn;
  int n_joints = 14;
  double dropout_rate = 0.5;
  /// The network regresses target distances multiplied by this factor
  /// (millimetres to metres by default).
  double target_scale = 1e-3;
};

/// Per-layer forward caches of one training step.
template <typename T>
struct Tape {
  std::vector<LayerCache<T>> caches;
};

/// One of the two distance-matrix regressors:
///   fconn: FC(P->128) ReLU Drop, FC(128->128) ReLU Drop, FC(128->P) ReLU, P = N(N-1)/2
///   fconv: [Conv7 1->64, BN, ReLU, MaxPool, Drop], [Conv7 64->64, BN, ReLU, MaxPool, Drop],
///          [Up x2, Conv7 64->64, ReLU, Drop], [Up x2, Conv7 64->64, ReLU, Conv1 64->1],
///          MatrixSymmetrize, ReLU
template <typename T>
class Network {
 public:
  /// Builds the layer stack with He-initialized weights drawn from `seed`.
  Network(const ModelConfig& config, std::uint64_t seed);

  const ModelConfig& config() const { return config_; }
  Shape sample_input_shape() const;
  Shape sample_output_shape() const;

  void initialize(std::uint64_t seed);

  /// Inference: dropout off, batch norm on running statistics. Reentrant.
  BasicTensor<T> infer(const BasicTensor<T>& x) const;
  /// Forward pass recording caches into `tape`; in train mode it also updates
  /// batch-norm running statistics.
  BasicTensor<T> forward(const BasicTensor<T>& x, const ForwardContext& ctx, Tape<T>* tape);
  /// Accumulates parameter gradients; returns the input gradient when
  /// `input_grad` is set, otherwise an empty tensor.
  BasicTensor<T> backward(const BasicTensor<T>& grad_out, const Tape<T>& tape,
                          bool input_grad = false);
  void zero_grad();

  /// All named tensors in layer order, including batch-norm running statistics.
  std::vector<ParamSlot<T>> slots();
  /// Trainable tensors only.
  std::vector<ParamSlot<T>> parameters();
  std::size_t parameter_count() const;

  const std::vector<std::unique_ptr<Layer<T>>>& layers() const { return layers_; }

 private:
  BasicTensor<T> run(const BasicTensor<T>& x, const ForwardContext& ctx, Tape<T>* tape) const;

  ModelConfig config_;
  std::vector<std::unique_ptr<Layer<T>>> layers_;
};

using Model = Network<float>;

Model init_model(const ModelConfig& config, std::uint64_t seed);
/// Trainable parameters of the architecture (running statistics excluded).
std::size_t count_params(const ModelConfig& config);

/// Batches input matrices into the architecture's input layout.
template <typename T>
BasicTensor<T> encode_inputs(const ModelConfig& config, std::span<const DistanceMatrix> inputs);
/// Batches target matrices (millimetres) into the output layout, scaled by `target_scale`.
template <typename T>
BasicTensor<T> encode_targets(const ModelConfig& config, std::span<const DistanceMatrix> targets);
/// Sample `index` of a network output as a distance matrix in millimetres.
/// The diagonal, which the convolutional output does not constrain, is set to zero.
template <typename T>
DistanceMatrix decode_output(const ModelConfig& config, const BasicTensor<T>& output, int index);

/// Predicted 3D distance matrix (millimetres) for one normalized 2D input.
DistanceMatrix predict_edm(const Model& model, const DistanceMatrix& input);
std::vector<DistanceMatrix> predict_edms(const Model& model, std::span<const DistanceMatrix> inputs);

extern template class Network<float>;
extern template class Network<double>;

}  // namespace edmlift::nn
