#include "edmlift/nn/network.hpp"

#include "edmlift/core/error.hpp"

namespace edmlift::nn {

std::string_view to_string(Arch arch) { return arch == Arch::kFconn ? "fconn" : "fconv"; }

Arch parse_arch(std::string_view text) {
  if (text == "fconn") return Arch::kFconn;
  if (text == "fconv") return Arch::kFconv;
  throw Error(ErrorCode::kInvalidArgument, "unknown architecture '" + std::string(text) + "'");
}

namespace {

constexpr int kHidden = 128;
constexpr int kFeatures = 64;
constexpr int kKernel = 7;

template <typename T>
std::vector<std::unique_ptr<Layer<T>>> build_layers(const ModelConfig& config) {
  if (config.n_joints < 2) throw Error(ErrorCode::kInvalidArgument, "need at least 2 joints");
  std::vector<std::unique_ptr<Layer<T>>> layers;
  auto add = [&](auto layer) { layers.push_back(std::move(layer)); };
  const double rate = config.dropout_rate;

  if (config.arch == Arch::kFconn) {
    const int packed = packed_size(config.n_joints);
    add(std::make_unique<Linear<T>>("fc1", packed, kHidden));
    add(std::make_unique<Relu<T>>("relu1"));
    add(std::make_unique<Dropout<T>>("drop1", rate));
    add(std::make_unique<Linear<T>>("fc2", kHidden, kHidden));
    add(std::make_unique<Relu<T>>("relu2"));
    add(std::make_unique<Dropout<T>>("drop2", rate));
    add(std::make_unique<Linear<T>>("fc3", kHidden, packed));
    add(std::make_unique<Relu<T>>("relu3"));
    return layers;
  }

  const int n = config.n_joints;
  const int half = (n + 1) / 2;
  add(std::make_unique<Conv2d<T>>("conv1", 1, kFeatures, kKernel));
  add(std::make_unique<BatchNorm2d<T>>("bn1", kFeatures));
  add(std::make_unique<Relu<T>>("relu1"));
  add(std::make_unique<MaxPool2d<T>>("pool1"));
  add(std::make_unique<Dropout<T>>("drop1", rate));
  add(std::make_unique<Conv2d<T>>("conv2", kFeatures, kFeatures, kKernel));
  add(std::make_unique<BatchNorm2d<T>>("bn2", kFeatures));
  add(std::make_unique<Relu<T>>("relu2"));
  add(std::make_unique<MaxPool2d<T>>("pool2"));
  add(std::make_unique<Dropout<T>>("drop2", rate));
  add(std::make_unique<Upsample2x<T>>("up3", half, half));
  add(std::make_unique<Conv2d<T>>("conv3", kFeatures, kFeatures, kKernel));
  add(std::make_unique<Relu<T>>("relu3"));
  add(std::make_unique<Dropout<T>>("drop3", rate));
  add(std::make_unique<Upsample2x<T>>("up4", n, n));
  add(std::make_unique<Conv2d<T>>("conv4", kFeatures, kFeatures, kKernel));
  add(std::make_unique<Relu<T>>("relu4"));
  add(std::make_unique<Conv2d<T>>("conv5", kFeatures, 1, 1));
  add(std::make_unique<MatrixSymmetrize<T>>("sym"));
  add(std::make_unique<Relu<T>>("relu_out"));
  return layers;
}

}  // namespace

template <typename T>
Network<T>::Network(const ModelConfig& config, std::uint64_t seed)
    : config_(config), layers_(build_layers<T>(config)) {
  layers_.front()->set_input_grad(false);
  // Validates the shape chain once.
  sample_output_shape();
  initialize(seed);
}

template <typename T>
Shape Network<T>::sample_input_shape() const {
  if (config_.arch == Arch::kFconn) return {packed_size(config_.n_joints)};
  return {1, config_.n_joints, config_.n_joints};
}

template <typename T>
Shape Network<T>::sample_output_shape() const {
  Shape shape = sample_input_shape();
  for (const auto& layer : layers_) shape = layer->output_shape(shape);
  return shape;
}

template <typename T>
void Network<T>::initialize(std::uint64_t seed) {
  Rng rng(seed);
  for (auto& layer : layers_) layer->initialize(rng);
}

template <typename T>
BasicTensor<T> Network<T>::run(const BasicTensor<T>& x, const ForwardContext& ctx,
                               Tape<T>* tape) const {
  Shape expected = sample_input_shape();
  expected.insert(expected.begin(), x.rank() > 0 ? x.dim(0) : 0);
  if (x.shape() != expected) {
    throw Error(ErrorCode::kShape, "network input " + shape_string(x.shape()) + ", expected " +
                                       shape_string(expected));
  }
  if (tape) tape->caches.assign(layers_.size(), {});
  BasicTensor<T> h = x;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    h = layers_[i]->forward(h, ctx, tape ? &tape->caches[i] : nullptr);
    if (!h.all_finite()) {
      throw Error(ErrorCode::kNumericFailure,
                  "layer '" + layers_[i]->name() + "' produced a non-finite value");
    }
  }
  return h;
}

template <typename T>
BasicTensor<T> Network<T>::infer(const BasicTensor<T>& x) const {
  return run(x, ForwardContext{Mode::kInfer, false, nullptr}, nullptr);
}

template <typename T>
BasicTensor<T> Network<T>::forward(const BasicTensor<T>& x, const ForwardContext& ctx,
                                   Tape<T>* tape) {
  Tape<T> local;
  Tape<T>* used = tape ? tape : &local;
  BasicTensor<T> y = run(x, ctx, used);
  if (ctx.mode == Mode::kTrain) {
    for (std::size_t i = 0; i < layers_.size(); ++i) layers_[i]->update_buffers(used->caches[i]);
  }
  return y;
}

template <typename T>
BasicTensor<T> Network<T>::backward(const BasicTensor<T>& grad_out, const Tape<T>& tape,
                                    bool input_grad) {
  if (tape.caches.size() != layers_.size()) {
    throw Error(ErrorCode::kInvalidArgument, "backward called without a recorded forward pass");
  }
  layers_.front()->set_input_grad(input_grad);
  BasicTensor<T> g = grad_out;
  for (std::size_t i = layers_.size(); i-- > 0;) {
    g = layers_[i]->backward(g, tape.caches[i]);
  }
  layers_.front()->set_input_grad(false);
  return input_grad ? g : BasicTensor<T>{};
}

template <typename T>
void Network<T>::zero_grad() {
  for (auto& slot : parameters()) slot.grad->fill(T(0));
}

template <typename T>
std::vector<ParamSlot<T>> Network<T>::slots() {
  std::vector<ParamSlot<T>> out;
  for (auto& layer : layers_) {
    for (auto& slot : layer->slots()) out.push_back(slot);
  }
  return out;
}

template <typename T>
std::vector<ParamSlot<T>> Network<T>::parameters() {
  std::vector<ParamSlot<T>> out;
  for (auto& slot : slots()) {
    if (slot.trainable()) out.push_back(slot);
  }
  return out;
}

template <typename T>
std::size_t Network<T>::parameter_count() const {
  std::size_t n = 0;
  for (const auto& slot : const_cast<Network*>(this)->parameters()) n += slot.value->size();
  return n;
}

template class Network<float>;
template class Network<double>;

Model init_model(const ModelConfig& config, std::uint64_t seed) { return Model(config, seed); }

std::size_t count_params(const ModelConfig& config) {
  return Network<float>(config, 0).parameter_count();
}

template <typename T>
BasicTensor<T> encode_inputs(const ModelConfig& config, std::span<const DistanceMatrix> inputs) {
  const int n = config.n_joints;
  const int batch = static_cast<int>(inputs.size());
  const bool packed = config.arch == Arch::kFconn;
  const int width = packed ? packed_size(n) : n * n;
  BasicTensor<T> x(packed ? Shape{batch, width} : Shape{batch, 1, n, n});
  for (int b = 0; b < batch; ++b) {
    const DistanceMatrix& d = inputs[b];
    if (d.size() != n) {
      throw Error(ErrorCode::kShape, "input matrix " + std::to_string(b) + " is " +
                                         std::to_string(d.size()) + "x" + std::to_string(d.size()) +
                                         ", expected " + std::to_string(n));
    }
    if (d.units() != EdmUnits::kNormalized) {
      throw Error(ErrorCode::kInvalidInput, "network inputs must be normalized 2D distance matrices");
    }
    T* dst = x.data() + static_cast<std::ptrdiff_t>(b) * width;
    if (packed) {
      int i = 0;
      for (int m = 0; m < n; ++m) {
        for (int k = m + 1; k < n; ++k) dst[i++] = static_cast<T>(d(m, k));
      }
    } else {
      for (int m = 0; m < n; ++m) {
        for (int k = 0; k < n; ++k) dst[m * n + k] = static_cast<T>(d(m, k));
      }
    }
  }
  return x;
}

template <typename T>
BasicTensor<T> encode_targets(const ModelConfig& config, std::span<const DistanceMatrix> targets) {
  const int n = config.n_joints;
  const int batch = static_cast<int>(targets.size());
  const bool packed = config.arch == Arch::kFconn;
  const int width = packed ? packed_size(n) : n * n;
  BasicTensor<T> y(packed ? Shape{batch, width} : Shape{batch, 1, n, n});
  for (int b = 0; b < batch; ++b) {
    const DistanceMatrix& d = targets[b];
    if (d.size() != n) throw Error(ErrorCode::kShape, "target matrix has the wrong size");
    T* dst = y.data() + static_cast<std::ptrdiff_t>(b) * width;
    if (packed) {
      int i = 0;
      for (int m = 0; m < n; ++m) {
        for (int k = m + 1; k < n; ++k) dst[i++] = static_cast<T>(d(m, k) * config.target_scale);
      }
    } else {
      for (int m = 0; m < n; ++m) {
        for (int k = 0; k < n; ++k) dst[m * n + k] = static_cast<T>(d(m, k) * config.target_scale);
      }
    }
  }
  return y;
}

template <typename T>
DistanceMatrix decode_output(const ModelConfig& config, const BasicTensor<T>& output, int index) {
  const int n = config.n_joints;
  const double inv = 1.0 / config.target_scale;
  if (config.arch == Arch::kFconn) {
    const int width = packed_size(n);
    std::vector<double> packed(static_cast<std::size_t>(width));
    const T* src = output.data() + static_cast<std::ptrdiff_t>(index) * width;
    for (int i = 0; i < width; ++i) packed[i] = static_cast<double>(src[i]) * inv;
    return unpack_upper(packed, n, EdmUnits::kMillimeters);
  }
  const T* src = output.data() + static_cast<std::ptrdiff_t>(index) * n * n;
  Eigen::MatrixXd d(n, n);
  for (int m = 0; m < n; ++m) {
    for (int k = 0; k < n; ++k) d(m, k) = m == k ? 0.0 : static_cast<double>(src[m * n + k]) * inv;
  }
  return DistanceMatrix(std::move(d), EdmUnits::kMillimeters);
}

template BasicTensor<float> encode_inputs<float>(const ModelConfig&, std::span<const DistanceMatrix>);
template BasicTensor<double> encode_inputs<double>(const ModelConfig&, std::span<const DistanceMatrix>);
template BasicTensor<float> encode_targets<float>(const ModelConfig&, std::span<const DistanceMatrix>);
template BasicTensor<double> encode_targets<double>(const ModelConfig&,
                                                    std::span<const DistanceMatrix>);
template DistanceMatrix decode_output<float>(const ModelConfig&, const BasicTensor<float>&, int);
template DistanceMatrix decode_output<double>(const ModelConfig&, const BasicTensor<double>&, int);

std::vector<DistanceMatrix> predict_edms(const Model& model, std::span<const DistanceMatrix> inputs) {
  std::vector<DistanceMatrix> out;
  out.reserve(inputs.size());
  constexpr std::size_t kBatch = 256;
  for (std::size_t b0 = 0; b0 < inputs.size(); b0 += kBatch) {
    auto chunk = inputs.subspan(b0, std::min(kBatch, inputs.size() - b0));
    const Tensor y = model.infer(encode_inputs<float>(model.config(), chunk));
    for (int i = 0; i < static_cast<int>(chunk.size()); ++i) {
      out.push_back(decode_output(model.config(), y, i));
    }
  }
  return out;
}

DistanceMatrix predict_edm(const Model& model, const DistanceMatrix& input) {
  return predict_edms(model, std::span<const DistanceMatrix>(&input, 1)).front();
}

}  // namespace edmlift::nn
