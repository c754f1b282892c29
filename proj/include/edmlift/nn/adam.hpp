#pragma once

#include <cstdint>
#include <vector>

#include "edmlift/nn/layers.hpp"

namespace edmlift::nn {

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// Adam with bias correction. Moments are kept per parameter slot, in the
/// order the slots are passed to `step`.
template <typename T>
class Adam {
 public:
  explicit Adam(AdamConfig config = {}) : config_(config) {}

  /// Applies one update with step size `lr`. Throws numeric-failure on a
  /// non-finite gradient, before touching any parameter.
  void step(const std::vector<ParamSlot<T>>& params, double lr);

  std::int64_t steps() const { return steps_; }
  const std::vector<std::vector<double>>& first_moments() const { return m_; }
  const std::vector<std::vector<double>>& second_moments() const { return v_; }

 private:
  AdamConfig config_;
  std::int64_t steps_ = 0;
  std::vector<std::vector<double>> m_;
  std::vector<std::vector<double>> v_;
};

extern template class Adam<float>;
extern template class Adam<double>;

}  // namespace edmlift::nn
