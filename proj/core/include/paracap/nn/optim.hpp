#pragma once

#include "paracap/nn/tensor.hpp"

#include <vector>

namespace paracap::nn {

struct OptimizerConfig {
  double base_lr = 1e-3;
  double min_lr = 1e-4;
  double weight_decay = 5e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// min + (base - min)(1 + cos(pi e / T)) / 2, with e clamped to [0, T].
double cosine_lr(int epoch, int total, double base_lr, double min_lr);

/// Adam with decoupled weight decay.
class AdamW {
public:
  explicit AdamW(const OptimizerConfig& cfg = {}) : cfg_(cfg) {}

  void step(const std::vector<Param*>& params, double lr);
  long steps() const { return t_; }

private:
  OptimizerConfig cfg_;
  long t_ = 0;
};

void zero_grad(const std::vector<Param*>& params);

} // namespace paracap::nn
