#include "edmlift/nn/tensor.hpp"

#include <algorithm>
#include <cmath>

#include "edmlift/core/error.hpp"

namespace edmlift::nn {

std::size_t shape_size(const Shape& shape) {
  std::size_t n = 1;
  for (int d : shape) {
    if (d < 0) throw Error(ErrorCode::kShape, "negative dimension in " + shape_string(shape));
    n *= static_cast<std::size_t>(d);
  }
  return n;
}

std::string shape_string(const Shape& shape) {
  std::string s = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(shape[i]);
  }
  return s + "]";
}

template <typename T>
BasicTensor<T>::BasicTensor(Shape shape, T fill)
    : shape_(std::move(shape)), data_(shape_size(shape_), fill) {}

template <typename T>
BasicTensor<T>::BasicTensor(Shape shape, std::vector<T> data)
    : shape_(std::move(shape)), data_(data.begin(), data.end()) {
  if (data_.size() != shape_size(shape_)) {
    throw Error(ErrorCode::kShape, "tensor data length " + std::to_string(data_.size()) +
                                       " does not match shape " + shape_string(shape_));
  }
}

template <typename T>
void BasicTensor<T>::fill(T value) {
  std::fill(data_.begin(), data_.end(), value);
}

template <typename T>
BasicTensor<T> BasicTensor<T>::reshaped(Shape shape) const {
  if (shape_size(shape) != data_.size()) {
    throw Error(ErrorCode::kShape, "cannot reshape " + shape_string(shape_) + " to " + shape_string(shape));
  }
  BasicTensor out;
  out.shape_ = std::move(shape);
  out.data_ = data_;
  return out;
}

template <typename T>
bool BasicTensor<T>::all_finite() const {
  return std::all_of(data_.begin(), data_.end(), [](T v) { return std::isfinite(v); });
}

template class BasicTensor<float>;
template class BasicTensor<double>;

}  // namespace edmlift::nn
