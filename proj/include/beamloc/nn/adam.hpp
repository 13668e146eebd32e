// Bias-corrected Adam over a fixed parameter registry.
#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "beamloc/common.hpp"
#include "beamloc/nn/tensor.hpp"

namespace beamloc::nn {

struct AdamConfig {
  double lr = 0.01;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

class Adam {
 public:
  Adam(std::vector<ParamView> params, AdamConfig cfg = {})
      : params_(std::move(params)), cfg_(cfg) {
    if (cfg_.lr <= 0.0) throw InvalidArgument("adam: learning rate must be positive");
    m_.reserve(params_.size());
    v_.reserve(params_.size());
    for (const auto& p : params_) {
      m_.emplace_back(p.value->size(), 0.0);
      v_.emplace_back(p.value->size(), 0.0);
    }
  }

  void step() {
    ++t_;
    const double bc1 = 1.0 - std::pow(cfg_.beta1, t_);
    const double bc2 = 1.0 - std::pow(cfg_.beta2, t_);
    for (std::size_t i = 0; i < params_.size(); ++i) {
      auto& value = *params_[i].value;
      const auto& grad = *params_[i].grad;
      auto& m = m_[i];
      auto& v = v_[i];
      for (std::size_t j = 0; j < value.size(); ++j) {
        const double g = grad[j];
        m[j] = cfg_.beta1 * m[j] + (1.0 - cfg_.beta1) * g;
        v[j] = cfg_.beta2 * v[j] + (1.0 - cfg_.beta2) * g * g;
        value[j] -= cfg_.lr * (m[j] / bc1) / (std::sqrt(v[j] / bc2) + cfg_.eps);
      }
    }
  }

  long step_count() const { return t_; }

 private:
  std::vector<ParamView> params_;
  AdamConfig cfg_;
  std::vector<std::vector<double>> m_, v_;
  long t_ = 0;
};

}  // namespace beamloc::nn
