#pragma once

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "dp/common.hpp"
#include "dp/tensor.hpp"

namespace dp {

inline double cosine_lr(int step, int total_steps, double lr0) {
  if (total_steps <= 0) throw ConfigError("cosine_lr: total_steps must be positive");
  const double frac = static_cast<double>(step) / static_cast<double>(total_steps);
  return lr0 * 0.5 * (1.0 + std::cos(3.141592653589793 * frac));
}

// Decoupled-weight-decay Adam over an ordered parameter set. Gradients are
// read from each tensor's grad buffer; the caller zeroes them between steps.
class AdamW {
 public:
  AdamW(std::vector<std::pair<std::string, Tensor>> params, double weight_decay,
        double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8)
      : params_(std::move(params)),
        weight_decay_(weight_decay),
        beta1_(beta1),
        beta2_(beta2),
        eps_(eps) {
    for (const auto& [name, t] : params_) {
      if (!t.requires_grad())
        throw ConfigError("AdamW: parameter/gradient registry mismatch at " + name);
      m_.emplace_back(t.size(), 0.0);
      v_.emplace_back(t.size(), 0.0);
    }
  }

  void step(double lr) {
    ++t_;
    const double bc1 = 1.0 - std::pow(beta1_, t_);
    const double bc2 = 1.0 - std::pow(beta2_, t_);
    for (size_t p = 0; p < params_.size(); ++p) {
      Tensor& tensor = params_[p].second;
      double* w = tensor.data();
      const double* g = tensor.grad();
      double* m = m_[p].data();
      double* v = v_[p].data();
      for (size_t i = 0; i < tensor.size(); ++i) {
        m[i] = beta1_ * m[i] + (1.0 - beta1_) * g[i];
        v[i] = beta2_ * v[i] + (1.0 - beta2_) * g[i] * g[i];
        const double mhat = m[i] / bc1;
        const double vhat = v[i] / bc2;
        w[i] -= lr * (mhat / (std::sqrt(vhat) + eps_) + weight_decay_ * w[i]);
      }
    }
  }

  int steps_taken() const { return t_; }
  const std::vector<std::pair<std::string, Tensor>>& params() const { return params_; }

 private:
  std::vector<std::pair<std::string, Tensor>> params_;
  double weight_decay_, beta1_, beta2_, eps_;
  std::vector<std::vector<double>> m_, v_;
  int t_ = 0;
};

}  // namespace dp
