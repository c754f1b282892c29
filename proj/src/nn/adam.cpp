#include "edmlift/nn/adam.hpp"

#include <cmath>

#include <Eigen/Core>

#include "edmlift/core/error.hpp"

namespace edmlift::nn {

template <typename T>
void Adam<T>::step(const std::vector<ParamSlot<T>>& params, double lr) {
  if (m_.empty()) {
    for (const auto& p : params) {
      m_.emplace_back(p.value->size(), 0.0);
      v_.emplace_back(p.value->size(), 0.0);
    }
  }
  if (m_.size() != params.size()) {
    throw Error(ErrorCode::kShape, "optimizer state does not match the parameter list");
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (params[i].grad->size() != m_[i].size() || params[i].value->size() != m_[i].size()) {
      throw Error(ErrorCode::kShape, "gradient shape mismatch for '" + params[i].name + "'");
    }
    if (!params[i].grad->all_finite()) {
      throw Error(ErrorCode::kNumericFailure, "non-finite gradient for '" + params[i].name + "'");
    }
  }

  ++steps_;
  const double t = static_cast<double>(steps_);
  const double b1 = config_.beta1, b2 = config_.beta2;
  const double inv_c1 = 1.0 / (1.0 - std::pow(b1, t));
  const double inv_c2 = 1.0 / (1.0 - std::pow(b2, t));
  // Moments of parameters that stop receiving gradient decay geometrically;
  // flush them before they turn into (very slow) denormals.
  constexpr double kFlush = 1e-150;
  for (std::size_t i = 0; i < params.size(); ++i) {
    const auto n = static_cast<Eigen::Index>(m_[i].size());
    Eigen::Map<Eigen::ArrayXd> m(m_[i].data(), n);
    Eigen::Map<Eigen::ArrayXd> v(v_[i].data(), n);
    Eigen::Map<Eigen::Array<T, Eigen::Dynamic, 1>> w(params[i].value->data(), n);
    const Eigen::ArrayXd g =
        Eigen::Map<const Eigen::Array<T, Eigen::Dynamic, 1>>(params[i].grad->data(), n)
            .template cast<double>();
    m = b1 * m + (1.0 - b1) * g;
    v = b2 * v + (1.0 - b2) * g.square();
    m = (m.abs() < kFlush).select(0.0, m);
    v = (v < kFlush).select(0.0, v);
    const Eigen::ArrayXd delta = lr * (m * inv_c1) / ((v * inv_c2).sqrt() + config_.epsilon);
    w = (w.template cast<double>() - delta).template cast<T>();
  }
}

template class Adam<float>;
template class Adam<double>;

}  // namespace edmlift::nn
