#pragma once

#include <vector>

#include "cfisac/autodiff/tensor.hpp"

namespace cfisac::ad {

struct AdamConfig {
  double lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// Bias-corrected Adam. Moments are shaped like the parameters they track.
class Adam {
 public:
  explicit Adam(AdamConfig config = {}) : config_(config) {}

  /// Applies one update to every parameter; `grads[i]` pairs with `params[i]`.
  void step(std::vector<Tensor*> params, const std::vector<Tensor>& grads);

  long steps() const { return steps_; }
  const AdamConfig& config() const { return config_; }
  void set_lr(double lr) { config_.lr = lr; }
  const std::vector<Tensor>& first_moments() const { return m_; }
  const std::vector<Tensor>& second_moments() const { return v_; }

 private:
  AdamConfig config_;
  long steps_ = 0;
  std::vector<Tensor> m_, v_;
};

}  // namespace cfisac::ad
