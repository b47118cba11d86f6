#pragma once

#include <cmath>

#include "rnnbelief/nn/params.hpp"

namespace rnnbelief::nn {

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// Adam with bias correction. Always descends; callers maximizing an
/// objective pass the gradient of its negation.
class Adam {
 public:
  Adam() = default;
  Adam(const Parameters& layout, AdamConfig config)
      : config_(config), m_(layout.zeros_like()), v_(layout.zeros_like()) {}

  const AdamConfig& config() const { return config_; }
  long steps() const { return t_; }
  const Parameters& first_moment() const { return m_; }
  const Parameters& second_moment() const { return v_; }

  void step(Parameters& params, const Parameters& grads) {
    if (!params.same_shape(grads) || !params.same_shape(m_))
      throw ShapeError("adam: parameter and gradient layouts differ");
    if (!grads.all_finite()) throw NumericalError("adam: non-finite gradient");
    ++t_;
    const double c1 = 1.0 - std::pow(config_.beta1, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(config_.beta2, static_cast<double>(t_));
    for (std::size_t i = 0; i < params.size(); ++i) {
      m_[i] = config_.beta1 * m_[i] + (1.0 - config_.beta1) * grads[i];
      v_[i] = config_.beta2 * v_[i] + (1.0 - config_.beta2) * grads[i].cwiseAbs2();
      params[i].array() -= config_.learning_rate * (m_[i].array() / c1) /
                           ((v_[i].array() / c2).sqrt() + config_.epsilon);
    }
  }

 private:
  AdamConfig config_;
  Parameters m_;
  Parameters v_;
  long t_ = 0;
};

}  // namespace rnnbelief::nn
