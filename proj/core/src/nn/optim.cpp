#include "paracap/nn/optim.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace paracap::nn {

double cosine_lr(int epoch, int total, double base_lr, double min_lr)
{
  if (total <= 0)
    return base_lr;
  const double e = std::clamp(epoch, 0, total);
  return min_lr + 0.5 * (base_lr - min_lr) * (1.0 + std::cos(std::numbers::pi * e / total));
}

void AdamW::step(const std::vector<Param*>& params, double lr)
{
  ++t_;
  const double c1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
  for (Param* p : params) {
    if (!p->trainable)
      continue;
    p->m = cfg_.beta1 * p->m + (1.0 - cfg_.beta1) * p->grad;
    p->v = cfg_.beta2 * p->v + (1.0 - cfg_.beta2) * p->grad.cwiseProduct(p->grad);
    if (cfg_.weight_decay != 0.0)
      p->value *= 1.0 - lr * cfg_.weight_decay;
    p->value.array() -=
        lr * (p->m.array() / c1) / ((p->v.array() / c2).sqrt() + cfg_.eps);
  }
}

void zero_grad(const std::vector<Param*>& params)
{
  for (Param* p : params)
    p->zero_grad();
}

} // namespace paracap::nn
