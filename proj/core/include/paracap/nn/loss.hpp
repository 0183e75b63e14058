#pragma once

#include "paracap/nn/tensor.hpp"

#include <span>
#include <vector>

namespace paracap::nn {

/// Probabilities are clamped here before taking logarithms.
inline constexpr double kProbClamp = 1e-12;

struct FocalLossConfig {
  double gamma = 2.0;
  /// Per-class weights; empty means 1 for every class.
  std::vector<double> alpha;

  double alpha_of(int t) const;
};

enum class Reduction { Sum, Mean };

struct LossResult {
  double value = 0.0;
  /// Gradient with respect to the function input.
  Matrix grad;
};

/// FL = -alpha_t (1 - p_t)^gamma log p_t per row; gradient w.r.t. `probs`.
LossResult focal_loss(const Matrix& probs, std::span<const int> labels, const FocalLossConfig& cfg,
                      Reduction reduction = Reduction::Sum);

/// Focal loss of softmax(logits); gradient w.r.t. the logits.
LossResult focal_loss_with_logits(const Matrix& logits, std::span<const int> labels,
                                  const FocalLossConfig& cfg,
                                  Reduction reduction = Reduction::Mean);

/// -log softmax(logits)_t; gradient w.r.t. the logits.
LossResult cross_entropy_with_logits(const Matrix& logits, std::span<const int> labels,
                                     Reduction reduction = Reduction::Mean);

/// Mean squared percentage error (1/N) sum ((y - yhat) / y)^2; gradient
/// w.r.t. yhat as an N x 1 matrix. Throws DataError on a non-positive target.
LossResult spe_loss(std::span<const double> y, std::span<const double> yhat);

} // namespace paracap::nn
