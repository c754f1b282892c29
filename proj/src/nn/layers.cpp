#include "edmlift/nn/layers.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Core>

#include "edmlift/core/error.hpp"

namespace edmlift::nn {
namespace {

template <typename T>
using RowMat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using MapMat = Eigen::Map<RowMat<T>>;
template <typename T>
using ConstMapMat = Eigen::Map<const RowMat<T>>;

void require_rank(const std::string& layer, const Shape& shape, int rank) {
  if (static_cast<int>(shape.size()) != rank) {
    throw Error(ErrorCode::kShape, "layer '" + layer + "' expects rank-" + std::to_string(rank) +
                                       " input, got " + shape_string(shape));
  }
}

void require_dim(const std::string& layer, const Shape& shape, std::size_t axis, int expected) {
  if (shape.at(axis) != expected) {
    throw Error(ErrorCode::kShape, "layer '" + layer + "' expects axis " + std::to_string(axis) +
                                       " of size " + std::to_string(expected) + ", got " +
                                       shape_string(shape));
  }
}

template <typename T>
void he_normal(BasicTensor<T>& weight, int fan_in, Rng& rng) {
  std::normal_distribution<double> dist(0.0, std::sqrt(2.0 / static_cast<double>(fan_in)));
  for (auto& w : weight.values()) w = static_cast<T>(dist(rng));
}

// Column block of the im2col matrix for one sample. Row r = (c * k + ky) * k + kx,
// column col0 + y * width + x.
template <typename T>
void im2col(const T* image, int channels, int height, int width, int kernel, int pad, T* cols,
            std::ptrdiff_t row_stride, std::ptrdiff_t col0) {
  for (int c = 0; c < channels; ++c) {
    const T* plane = image + static_cast<std::ptrdiff_t>(c) * height * width;
    for (int ky = 0; ky < kernel; ++ky) {
      for (int kx = 0; kx < kernel; ++kx) {
        T* row = cols + ((static_cast<std::ptrdiff_t>(c) * kernel + ky) * kernel + kx) * row_stride +
                 col0;
        const int x_lo = std::max(0, pad - kx);
        const int x_hi = std::min(width, width + pad - kx);
        for (int y = 0; y < height; ++y) {
          T* dst = row + static_cast<std::ptrdiff_t>(y) * width;
          const int sy = y + ky - pad;
          if (sy < 0 || sy >= height || x_lo >= x_hi) {
            std::fill(dst, dst + width, T(0));
            continue;
          }
          const T* src = plane + static_cast<std::ptrdiff_t>(sy) * width + (kx - pad);
          std::fill(dst, dst + x_lo, T(0));
          std::copy(src + x_lo, src + x_hi, dst + x_lo);
          std::fill(dst + x_hi, dst + width, T(0));
        }
      }
    }
  }
}

template <typename T>
void col2im(const T* cols, std::ptrdiff_t row_stride, std::ptrdiff_t col0, int channels,
            int height, int width, int kernel, int pad, T* image) {
  for (int c = 0; c < channels; ++c) {
    T* plane = image + static_cast<std::ptrdiff_t>(c) * height * width;
    for (int ky = 0; ky < kernel; ++ky) {
      for (int kx = 0; kx < kernel; ++kx) {
        const T* row =
            cols + ((static_cast<std::ptrdiff_t>(c) * kernel + ky) * kernel + kx) * row_stride + col0;
        const int x_lo = std::max(0, pad - kx);
        const int x_hi = std::min(width, width + pad - kx);
        for (int y = 0; y < height; ++y) {
          const int sy = y + ky - pad;
          if (sy < 0 || sy >= height) continue;
          const T* src = row + static_cast<std::ptrdiff_t>(y) * width;
          T* dst = plane + static_cast<std::ptrdiff_t>(sy) * width + (kx - pad);
          for (int x = x_lo; x < x_hi; ++x) dst[x] += src[x];
        }
      }
    }
  }
}

// Samples per GEMM so the column matrix stays around 1k columns wide.
int conv_chunk(int batch, int pixels) { return std::clamp(1024 / std::max(1, pixels), 1, batch); }

}  // namespace

// ---------------------------------------------------------------- Linear

template <typename T>
Linear<T>::Linear(std::string name, int in_features, int out_features)
    : Layer<T>(std::move(name)),
      in_(in_features),
      out_(out_features),
      weight_({out_features, in_features}),
      bias_({out_features}),
      weight_grad_({out_features, in_features}),
      bias_grad_({out_features}) {}

template <typename T>
Shape Linear<T>::output_shape(const Shape& sample) const {
  require_rank(this->name(), sample, 1);
  require_dim(this->name(), sample, 0, in_);
  return {out_};
}

template <typename T>
BasicTensor<T> Linear<T>::forward(const BasicTensor<T>& x, const ForwardContext& ctx,
                                  LayerCache<T>* cache) const {
  require_rank(this->name(), x.shape(), 2);
  require_dim(this->name(), x.shape(), 1, in_);
  const int batch = x.dim(0);
  BasicTensor<T> y({batch, out_});
  ConstMapMat<T> in(x.data(), batch, in_);
  ConstMapMat<T> w(weight_.data(), out_, in_);
  MapMat<T> out(y.data(), batch, out_);
  if (ctx.mode == Mode::kInfer) {
    // row by row: GEMM edge kernels would make a sample's output depend on the batch size
    for (int b = 0; b < batch; ++b) out.row(b).noalias() = in.row(b) * w.transpose();
  } else {
    out.noalias() = in * w.transpose();
  }
  out.rowwise() += Eigen::Map<const Eigen::Matrix<T, 1, Eigen::Dynamic>>(bias_.data(), out_);
  if (cache) cache->input = x;
  return y;
}

template <typename T>
BasicTensor<T> Linear<T>::backward(const BasicTensor<T>& grad_out, const LayerCache<T>& cache) {
  const int batch = grad_out.dim(0);
  ConstMapMat<T> g(grad_out.data(), batch, out_);
  ConstMapMat<T> in(cache.input.data(), batch, in_);
  MapMat<T>(weight_grad_.data(), out_, in_).noalias() += g.transpose() * in;
  Eigen::Map<Eigen::Matrix<T, 1, Eigen::Dynamic>>(bias_grad_.data(), out_) += g.colwise().sum();
  if (!this->input_grad()) return {};
  BasicTensor<T> gx({batch, in_});
  MapMat<T>(gx.data(), batch, in_).noalias() = g * ConstMapMat<T>(weight_.data(), out_, in_);
  return gx;
}

template <typename T>
std::vector<ParamSlot<T>> Linear<T>::slots() {
  return {{this->name() + ".weight", &weight_, &weight_grad_},
          {this->name() + ".bias", &bias_, &bias_grad_}};
}

template <typename T>
void Linear<T>::initialize(Rng& rng) {
  he_normal(weight_, in_, rng);
  bias_.fill(T(0));
}

// ---------------------------------------------------------------- ReLU

template <typename T>
BasicTensor<T> Relu<T>::forward(const BasicTensor<T>& x, const ForwardContext&,
                                LayerCache<T>* cache) const {
  BasicTensor<T> y = x;
  for (auto& v : y.values()) v = v > T(0) ? v : T(0);
  if (cache) cache->input = x;
  return y;
}

template <typename T>
BasicTensor<T> Relu<T>::backward(const BasicTensor<T>& grad_out, const LayerCache<T>& cache) {
  BasicTensor<T> gx = grad_out;
  for (std::size_t i = 0; i < gx.size(); ++i) {
    if (!(cache.input[i] > T(0))) gx[i] = T(0);
  }
  return gx;
}

// ---------------------------------------------------------------- Dropout

template <typename T>
Dropout<T>::Dropout(std::string name, double rate) : Layer<T>(std::move(name)), rate_(rate) {
  if (!(rate >= 0.0 && rate < 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "dropout rate must be in [0, 1)");
  }
}

template <typename T>
BasicTensor<T> Dropout<T>::forward(const BasicTensor<T>& x, const ForwardContext& ctx,
                                   LayerCache<T>* cache) const {
  const bool active = ctx.mode == Mode::kTrain && ctx.dropout && rate_ > 0.0;
  if (!active) {
    if (cache) cache->aux = {};
    return x;
  }
  if (!ctx.rng) throw Error(ErrorCode::kInvalidArgument, "dropout in train mode needs an rng");
  const double keep = 1.0 - rate_;
  const T scale = static_cast<T>(1.0 / keep);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  BasicTensor<T> mask(x.shape());
  BasicTensor<T> y(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) {
    mask[i] = unif(*ctx.rng) < keep ? scale : T(0);
    y[i] = x[i] * mask[i];
  }
  if (cache) cache->aux = std::move(mask);
  return y;
}

template <typename T>
BasicTensor<T> Dropout<T>::backward(const BasicTensor<T>& grad_out, const LayerCache<T>& cache) {
  if (cache.aux.empty()) return grad_out;
  BasicTensor<T> gx = grad_out;
  for (std::size_t i = 0; i < gx.size(); ++i) gx[i] *= cache.aux[i];
  return gx;
}

// ---------------------------------------------------------------- Conv2d

template <typename T>
Conv2d<T>::Conv2d(std::string name, int in_channels, int out_channels, int kernel)
    : Layer<T>(std::move(name)),
      cin_(in_channels),
      cout_(out_channels),
      kernel_(kernel),
      pad_(kernel / 2),
      weight_({out_channels, in_channels, kernel, kernel}),
      bias_({out_channels}),
      weight_grad_({out_channels, in_channels, kernel, kernel}),
      bias_grad_({out_channels}) {
  if (kernel % 2 == 0) throw Error(ErrorCode::kInvalidArgument, "conv kernel must be odd");
}

template <typename T>
Shape Conv2d<T>::output_shape(const Shape& sample) const {
  require_rank(this->name(), sample, 3);
  require_dim(this->name(), sample, 0, cin_);
  return {cout_, sample[1], sample[2]};
}

template <typename T>
BasicTensor<T> Conv2d<T>::forward(const BasicTensor<T>& x, const ForwardContext& ctx,
                                  LayerCache<T>* cache) const {
  require_rank(this->name(), x.shape(), 4);
  require_dim(this->name(), x.shape(), 1, cin_);
  const int batch = x.dim(0), height = x.dim(2), width = x.dim(3);
  const int pixels = height * width;
  const int depth = cin_ * kernel_ * kernel_;
  // one sample per GEMM at inference, same reason as in Linear
  const int chunk = ctx.mode == Mode::kInfer ? 1 : conv_chunk(batch, pixels);
  const std::ptrdiff_t stride = static_cast<std::ptrdiff_t>(chunk) * pixels;

  BasicTensor<T> y({batch, cout_, height, width});
  RowMat<T> cols(depth, stride);
  RowMat<T> out(cout_, stride);
  ConstMapMat<T> w(weight_.data(), cout_, depth);
  for (int b0 = 0; b0 < batch; b0 += chunk) {
    const int n = std::min(chunk, batch - b0);
    for (int s = 0; s < n; ++s) {
      im2col(x.data() + static_cast<std::ptrdiff_t>(b0 + s) * cin_ * pixels, cin_, height, width,
             kernel_, pad_, cols.data(), stride, static_cast<std::ptrdiff_t>(s) * pixels);
    }
    const Eigen::Index used = static_cast<Eigen::Index>(n) * pixels;
    out.leftCols(used).noalias() = w * cols.leftCols(used);
    for (int s = 0; s < n; ++s) {
      T* dst = y.data() + static_cast<std::ptrdiff_t>(b0 + s) * cout_ * pixels;
      for (int c = 0; c < cout_; ++c) {
        const T* src = out.data() + static_cast<std::ptrdiff_t>(c) * stride +
                       static_cast<std::ptrdiff_t>(s) * pixels;
        const T b = bias_[c];
        T* row = dst + static_cast<std::ptrdiff_t>(c) * pixels;
        for (int p = 0; p < pixels; ++p) row[p] = src[p] + b;
      }
    }
  }
  if (cache) cache->input = x;
  return y;
}

template <typename T>
BasicTensor<T> Conv2d<T>::backward(const BasicTensor<T>& grad_out, const LayerCache<T>& cache) {
  const BasicTensor<T>& x = cache.input;
  const int batch = x.dim(0), height = x.dim(2), width = x.dim(3);
  const int pixels = height * width;
  const int depth = cin_ * kernel_ * kernel_;
  const int chunk = conv_chunk(batch, pixels);
  const std::ptrdiff_t stride = static_cast<std::ptrdiff_t>(chunk) * pixels;

  BasicTensor<T> gx;
  if (this->input_grad()) gx = BasicTensor<T>(x.shape());
  RowMat<T> cols(depth, stride);
  RowMat<T> g(cout_, stride);
  RowMat<T> gcols;
  if (this->input_grad()) gcols.resize(depth, stride);
  ConstMapMat<T> w(weight_.data(), cout_, depth);
  MapMat<T> gw(weight_grad_.data(), cout_, depth);
  Eigen::Map<Eigen::Matrix<T, Eigen::Dynamic, 1>> gb(bias_grad_.data(), cout_);

  for (int b0 = 0; b0 < batch; b0 += chunk) {
    const int n = std::min(chunk, batch - b0);
    const Eigen::Index used = static_cast<Eigen::Index>(n) * pixels;
    for (int s = 0; s < n; ++s) {
      im2col(x.data() + static_cast<std::ptrdiff_t>(b0 + s) * cin_ * pixels, cin_, height, width,
             kernel_, pad_, cols.data(), stride, static_cast<std::ptrdiff_t>(s) * pixels);
      const T* src = grad_out.data() + static_cast<std::ptrdiff_t>(b0 + s) * cout_ * pixels;
      for (int c = 0; c < cout_; ++c) {
        std::copy(src + static_cast<std::ptrdiff_t>(c) * pixels,
                  src + static_cast<std::ptrdiff_t>(c + 1) * pixels,
                  g.data() + static_cast<std::ptrdiff_t>(c) * stride +
                      static_cast<std::ptrdiff_t>(s) * pixels);
      }
    }
    gw.noalias() += g.leftCols(used) * cols.leftCols(used).transpose();
    gb += g.leftCols(used).rowwise().sum();
    if (this->input_grad()) {
      gcols.leftCols(used).noalias() = w.transpose() * g.leftCols(used);
      for (int s = 0; s < n; ++s) {
        col2im(gcols.data(), stride, static_cast<std::ptrdiff_t>(s) * pixels, cin_, height, width,
               kernel_, pad_, gx.data() + static_cast<std::ptrdiff_t>(b0 + s) * cin_ * pixels);
      }
    }
  }
  return gx;
}

template <typename T>
std::vector<ParamSlot<T>> Conv2d<T>::slots() {
  return {{this->name() + ".weight", &weight_, &weight_grad_},
          {this->name() + ".bias", &bias_, &bias_grad_}};
}

template <typename T>
void Conv2d<T>::initialize(Rng& rng) {
  he_normal(weight_, cin_ * kernel_ * kernel_, rng);
  bias_.fill(T(0));
}

// ---------------------------------------------------------------- BatchNorm2d

template <typename T>
BatchNorm2d<T>::BatchNorm2d(std::string name, int channels, double eps, double momentum)
    : Layer<T>(std::move(name)),
      channels_(channels),
      eps_(eps),
      momentum_(momentum),
      gamma_({channels}, T(1)),
      beta_({channels}),
      gamma_grad_({channels}),
      beta_grad_({channels}),
      running_mean_({channels}),
      running_var_({channels}, T(1)) {}

// aux = normalized input; aux2 = [mean, biased var, inv std] per channel;
// indices[0] = 1 when batch statistics were used.
template <typename T>
BasicTensor<T> BatchNorm2d<T>::forward(const BasicTensor<T>& x, const ForwardContext& ctx,
                                       LayerCache<T>* cache) const {
  require_rank(this->name(), x.shape(), 4);
  require_dim(this->name(), x.shape(), 1, channels_);
  const int batch = x.dim(0);
  const std::ptrdiff_t pixels = static_cast<std::ptrdiff_t>(x.dim(2)) * x.dim(3);
  const bool batch_stats = ctx.mode == Mode::kTrain;
  const double count = static_cast<double>(batch) * static_cast<double>(pixels);

  BasicTensor<T> stats({3, channels_});
  for (int c = 0; c < channels_; ++c) {
    double mean = 0.0;
    double var = 0.0;
    if (batch_stats) {
      for (int b = 0; b < batch; ++b) {
        const T* p = x.data() + (static_cast<std::ptrdiff_t>(b) * channels_ + c) * pixels;
        for (std::ptrdiff_t i = 0; i < pixels; ++i) mean += p[i];
      }
      mean /= count;
      for (int b = 0; b < batch; ++b) {
        const T* p = x.data() + (static_cast<std::ptrdiff_t>(b) * channels_ + c) * pixels;
        for (std::ptrdiff_t i = 0; i < pixels; ++i) {
          const double d = p[i] - mean;
          var += d * d;
        }
      }
      var /= count;
    } else {
      mean = running_mean_[c];
      var = running_var_[c];
    }
    stats[c] = static_cast<T>(mean);
    stats[channels_ + c] = static_cast<T>(var);
    stats[2 * channels_ + c] = static_cast<T>(1.0 / std::sqrt(var + eps_));
  }

  BasicTensor<T> y(x.shape());
  BasicTensor<T> xhat;
  if (cache) xhat = BasicTensor<T>(x.shape());
  for (int b = 0; b < batch; ++b) {
    for (int c = 0; c < channels_; ++c) {
      const std::ptrdiff_t off = (static_cast<std::ptrdiff_t>(b) * channels_ + c) * pixels;
      const T mean = stats[c];
      const T inv = stats[2 * channels_ + c];
      const T g = gamma_[c];
      const T s = beta_[c];
      for (std::ptrdiff_t i = 0; i < pixels; ++i) {
        const T h = (x[off + i] - mean) * inv;
        y[off + i] = g * h + s;
        if (cache) xhat[off + i] = h;
      }
    }
  }
  if (cache) {
    cache->input = x;
    cache->aux = std::move(xhat);
    cache->aux2 = std::move(stats);
    cache->indices = {batch_stats ? 1 : 0};
  }
  return y;
}

template <typename T>
BasicTensor<T> BatchNorm2d<T>::backward(const BasicTensor<T>& grad_out, const LayerCache<T>& cache) {
  const BasicTensor<T>& xhat = cache.aux;
  const int batch = xhat.dim(0);
  const std::ptrdiff_t pixels = static_cast<std::ptrdiff_t>(xhat.dim(2)) * xhat.dim(3);
  const bool batch_stats = !cache.indices.empty() && cache.indices[0] == 1;
  const double count = static_cast<double>(batch) * static_cast<double>(pixels);

  BasicTensor<T> gx(xhat.shape());
  for (int c = 0; c < channels_; ++c) {
    double sum_g = 0.0;
    double sum_gh = 0.0;
    for (int b = 0; b < batch; ++b) {
      const std::ptrdiff_t off = (static_cast<std::ptrdiff_t>(b) * channels_ + c) * pixels;
      for (std::ptrdiff_t i = 0; i < pixels; ++i) {
        sum_g += grad_out[off + i];
        sum_gh += static_cast<double>(grad_out[off + i]) * xhat[off + i];
      }
    }
    gamma_grad_[c] += static_cast<T>(sum_gh);
    beta_grad_[c] += static_cast<T>(sum_g);
    if (!this->input_grad()) continue;

    const double inv = cache.aux2[2 * channels_ + c];
    const double g = gamma_[c];
    for (int b = 0; b < batch; ++b) {
      const std::ptrdiff_t off = (static_cast<std::ptrdiff_t>(b) * channels_ + c) * pixels;
      for (std::ptrdiff_t i = 0; i < pixels; ++i) {
        if (batch_stats) {
          gx[off + i] = static_cast<T>(g * inv / count *
                                       (count * grad_out[off + i] - sum_g - xhat[off + i] * sum_gh));
        } else {
          gx[off + i] = static_cast<T>(g * inv * grad_out[off + i]);
        }
      }
    }
  }
  return gx;
}

template <typename T>
void BatchNorm2d<T>::update_buffers(const LayerCache<T>& cache) {
  if (cache.indices.empty() || cache.indices[0] != 1) return;
  const double count = static_cast<double>(cache.aux.size()) / channels_;
  const double unbias = count > 1.0 ? count / (count - 1.0) : 1.0;
  for (int c = 0; c < channels_; ++c) {
    running_mean_[c] = static_cast<T>((1.0 - momentum_) * running_mean_[c] +
                                      momentum_ * cache.aux2[c]);
    running_var_[c] = static_cast<T>((1.0 - momentum_) * running_var_[c] +
                                     momentum_ * unbias * cache.aux2[channels_ + c]);
  }
}

template <typename T>
std::vector<ParamSlot<T>> BatchNorm2d<T>::slots() {
  return {{this->name() + ".gamma", &gamma_, &gamma_grad_},
          {this->name() + ".beta", &beta_, &beta_grad_},
          {this->name() + ".running_mean", &running_mean_, nullptr},
          {this->name() + ".running_var", &running_var_, nullptr}};
}

template <typename T>
void BatchNorm2d<T>::initialize(Rng&) {
  gamma_.fill(T(1));
  beta_.fill(T(0));
  running_mean_.fill(T(0));
  running_var_.fill(T(1));
}

// ---------------------------------------------------------------- MaxPool2d

template <typename T>
Shape MaxPool2d<T>::output_shape(const Shape& sample) const {
  require_rank(this->name(), sample, 3);
  return {sample[0], (sample[1] + 1) / 2, (sample[2] + 1) / 2};
}

template <typename T>
BasicTensor<T> MaxPool2d<T>::forward(const BasicTensor<T>& x, const ForwardContext&,
                                     LayerCache<T>* cache) const {
  require_rank(this->name(), x.shape(), 4);
  const int planes = x.dim(0) * x.dim(1);
  const int h = x.dim(2), w = x.dim(3);
  const int oh = (h + 1) / 2, ow = (w + 1) / 2;
  BasicTensor<T> y({x.dim(0), x.dim(1), oh, ow});
  std::vector<std::int32_t> argmax(y.size());
  for (int p = 0; p < planes; ++p) {
    const std::ptrdiff_t in_off = static_cast<std::ptrdiff_t>(p) * h * w;
    const std::ptrdiff_t out_off = static_cast<std::ptrdiff_t>(p) * oh * ow;
    for (int oy = 0; oy < oh; ++oy) {
      for (int ox = 0; ox < ow; ++ox) {
        std::ptrdiff_t best = in_off + static_cast<std::ptrdiff_t>(2 * oy) * w + 2 * ox;
        for (int dy = 0; dy < 2; ++dy) {
          for (int dx = 0; dx < 2; ++dx) {
            const int iy = 2 * oy + dy, ix = 2 * ox + dx;
            if (iy >= h || ix >= w) continue;
            const std::ptrdiff_t idx = in_off + static_cast<std::ptrdiff_t>(iy) * w + ix;
            if (x[idx] > x[best]) best = idx;
          }
        }
        y[out_off + oy * ow + ox] = x[best];
        argmax[out_off + oy * ow + ox] = static_cast<std::int32_t>(best);
      }
    }
  }
  if (cache) {
    cache->input = BasicTensor<T>(x.shape());  // shape only; values are not needed
    cache->indices = std::move(argmax);
  }
  return y;
}

template <typename T>
BasicTensor<T> MaxPool2d<T>::backward(const BasicTensor<T>& grad_out, const LayerCache<T>& cache) {
  BasicTensor<T> gx(cache.input.shape());
  for (std::size_t i = 0; i < grad_out.size(); ++i) gx[cache.indices[i]] += grad_out[i];
  return gx;
}

// ---------------------------------------------------------------- Upsample2x

template <typename T>
Upsample2x<T>::Upsample2x(std::string name, int out_height, int out_width)
    : Layer<T>(std::move(name)), out_h_(out_height), out_w_(out_width) {}

template <typename T>
Shape Upsample2x<T>::output_shape(const Shape& sample) const {
  require_rank(this->name(), sample, 3);
  if ((out_h_ + 1) / 2 != sample[1] || (out_w_ + 1) / 2 != sample[2]) {
    throw Error(ErrorCode::kShape, "layer '" + this->name() + "' cannot upsample " +
                                       shape_string(sample) + " to " + std::to_string(out_h_) +
                                       "x" + std::to_string(out_w_));
  }
  return {sample[0], out_h_, out_w_};
}

template <typename T>
BasicTensor<T> Upsample2x<T>::forward(const BasicTensor<T>& x, const ForwardContext&,
                                      LayerCache<T>* cache) const {
  require_rank(this->name(), x.shape(), 4);
  output_shape({x.dim(1), x.dim(2), x.dim(3)});
  const int planes = x.dim(0) * x.dim(1);
  const int h = x.dim(2), w = x.dim(3);
  BasicTensor<T> y({x.dim(0), x.dim(1), out_h_, out_w_});
  for (int p = 0; p < planes; ++p) {
    const T* src = x.data() + static_cast<std::ptrdiff_t>(p) * h * w;
    T* dst = y.data() + static_cast<std::ptrdiff_t>(p) * out_h_ * out_w_;
    for (int oy = 0; oy < out_h_; ++oy) {
      for (int ox = 0; ox < out_w_; ++ox) dst[oy * out_w_ + ox] = src[(oy / 2) * w + ox / 2];
    }
  }
  if (cache) cache->input = BasicTensor<T>(x.shape());
  return y;
}

template <typename T>
BasicTensor<T> Upsample2x<T>::backward(const BasicTensor<T>& grad_out, const LayerCache<T>& cache) {
  BasicTensor<T> gx(cache.input.shape());
  const int planes = gx.dim(0) * gx.dim(1);
  const int w = gx.dim(3);
  const int h = gx.dim(2);
  for (int p = 0; p < planes; ++p) {
    const T* src = grad_out.data() + static_cast<std::ptrdiff_t>(p) * out_h_ * out_w_;
    T* dst = gx.data() + static_cast<std::ptrdiff_t>(p) * h * w;
    for (int oy = 0; oy < out_h_; ++oy) {
      for (int ox = 0; ox < out_w_; ++ox) dst[(oy / 2) * w + ox / 2] += src[oy * out_w_ + ox];
    }
  }
  return gx;
}

// ---------------------------------------------------------------- MatrixSymmetrize

template <typename T>
BasicTensor<T> MatrixSymmetrize<T>::forward(const BasicTensor<T>& x, const ForwardContext&,
                                            LayerCache<T>* cache) const {
  require_rank(this->name(), x.shape(), 4);
  if (x.dim(2) != x.dim(3)) {
    throw Error(ErrorCode::kShape, "layer '" + this->name() + "' needs square maps, got " +
                                       shape_string(x.shape()));
  }
  const int planes = x.dim(0) * x.dim(1);
  const int n = x.dim(2);
  BasicTensor<T> y(x.shape());
  for (int p = 0; p < planes; ++p) {
    const T* z = x.data() + static_cast<std::ptrdiff_t>(p) * n * n;
    T* out = y.data() + static_cast<std::ptrdiff_t>(p) * n * n;
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) out[i * n + j] = (z[i * n + j] + z[j * n + i]) * T(0.5);
    }
  }
  if (cache) cache->input = BasicTensor<T>(x.shape());
  return y;
}

template <typename T>
BasicTensor<T> MatrixSymmetrize<T>::backward(const BasicTensor<T>& grad_out,
                                             const LayerCache<T>& cache) {
  ForwardContext ctx;
  return forward(grad_out, ctx, nullptr);
}

// ---------------------------------------------------------------- loss

template <typename T>
LossResult<T> mse_loss(const BasicTensor<T>& prediction, const BasicTensor<T>& target) {
  if (prediction.shape() != target.shape()) {
    throw Error(ErrorCode::kShape, "loss: prediction " + shape_string(prediction.shape()) +
                                       " vs target " + shape_string(target.shape()));
  }
  LossResult<T> out;
  out.grad = BasicTensor<T>(prediction.shape());
  const double n = static_cast<double>(prediction.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < prediction.size(); ++i) {
    const double d = static_cast<double>(prediction[i]) - static_cast<double>(target[i]);
    sum += d * d;
    out.grad[i] = static_cast<T>(2.0 * d / n);
  }
  out.loss = sum / n;
  return out;
}

#define EDMLIFT_INSTANTIATE(T)                                       \
  template class Linear<T>;                                          \
  template class Relu<T>;                                            \
  template class Dropout<T>;                                         \
  template class Conv2d<T>;                                          \
  template class BatchNorm2d<T>;                                     \
  template class MaxPool2d<T>;                                       \
  template class Upsample2x<T>;                                      \
  template class MatrixSymmetrize<T>;                                \
  template LossResult<T> mse_loss(const BasicTensor<T>&, const BasicTensor<T>&);

EDMLIFT_INSTANTIATE(float)
EDMLIFT_INSTANTIATE(double)
#undef EDMLIFT_INSTANTIATE

}  // namespace edmlift::nn
