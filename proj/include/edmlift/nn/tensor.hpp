#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace edmlift::nn {

using Shape = std::vector<int>;

std::size_t shape_size(const Shape& shape);
std::string shape_string(const Shape& shape);

/// Dense row-major array. Training runs on `Tensor` (32-bit); the 64-bit
/// instantiation backs finite-difference gradient checks.
template <typename T>
class BasicTensor {
 public:
  BasicTensor() = default;
  explicit BasicTensor(Shape shape, T fill = T(0));
  BasicTensor(Shape shape, std::vector<T> data);

  const Shape& shape() const { return shape_; }
  int dim(std::size_t axis) const { return shape_.at(axis); }
  int rank() const { return static_cast<int>(shape_.size()); }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  T* data() { return data_.data(); }
  const T* data() const { return data_.data(); }
  std::span<T> values() { return data_; }
  std::span<const T> values() const { return data_; }
  T& operator[](std::size_t i) { return data_[i]; }
  const T& operator[](std::size_t i) const { return data_[i]; }

  void fill(T value);
  /// Same data, new shape of equal size.
  BasicTensor reshaped(Shape shape) const;
  bool all_finite() const;

  friend bool operator==(const BasicTensor& a, const BasicTensor& b) {
    return a.shape_ == b.shape_ && a.data_ == b.data_;
  }

 private:
  // 64-byte aligned so vectorized reductions peel the same way on every run
  using Storage = std::vector<T, Eigen::aligned_allocator<T>>;
  Shape shape_;
  Storage data_;
};

using Tensor = BasicTensor<float>;

template <typename To, typename From>
BasicTensor<To> tensor_cast(const BasicTensor<From>& in) {
  std::vector<To> data(in.size());
  for (std::size_t i = 0; i < in.size(); ++i) data[i] = static_cast<To>(in[i]);
  return BasicTensor<To>(in.shape(), std::move(data));
}

extern template class BasicTensor<float>;
extern template class BasicTensor<double>;

}  // namespace edmlift::nn
