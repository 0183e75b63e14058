#include "paracap/nn/loss.hpp"
#include "paracap/nn/layers.hpp"
#include "paracap/error.hpp"

#include <cmath>

namespace paracap::nn {

double FocalLossConfig::alpha_of(int t) const
{
  return alpha.empty() ? 1.0 : alpha.at(static_cast<std::size_t>(t));
}

namespace {

void check_labels(const Matrix& m, std::span<const int> labels)
{
  if (static_cast<std::size_t>(m.rows()) != labels.size())
    throw DataError("loss: row count does not match label count");
  for (int t : labels)
    if (t < 0 || t >= m.cols())
      throw DataError("loss: label out of range");
}

double scale_of(Reduction r, Index rows)
{
  return r == Reduction::Mean && rows > 0 ? 1.0 / static_cast<double>(rows) : 1.0;
}

/// (1 - p)^(gamma - 1), defined as 0 where the base vanishes.
double focal_pow_m1(double one_minus_p, double gamma)
{
  if (gamma == 0.0 || one_minus_p <= 0.0)
    return 0.0;
  return std::pow(one_minus_p, gamma - 1.0);
}

} // namespace

LossResult focal_loss(const Matrix& probs, std::span<const int> labels, const FocalLossConfig& cfg,
                      Reduction reduction)
{
  if (cfg.gamma < 0.0)
    throw UsageError("focal loss gamma must be non-negative");
  check_labels(probs, labels);
  const double s = scale_of(reduction, probs.rows());
  LossResult r;
  r.grad = Matrix::Zero(probs.rows(), probs.cols());
  for (Index i = 0; i < probs.rows(); ++i) {
    const int t = labels[static_cast<std::size_t>(i)];
    const double a = cfg.alpha_of(t);
    const double p = probs(i, t);
    const double pc = std::max(p, kProbClamp);
    const double q = 1.0 - p;
    const double logp = std::log(pc);
    r.value -= a * std::pow(q, cfg.gamma) * logp;
    double d = a * cfg.gamma * focal_pow_m1(q, cfg.gamma) * logp;
    if (p >= kProbClamp)
      d -= a * std::pow(q, cfg.gamma) / p;
    r.grad(i, t) = d * s;
  }
  r.value *= s;
  return r;
}

LossResult focal_loss_with_logits(const Matrix& logits, std::span<const int> labels,
                                  const FocalLossConfig& cfg, Reduction reduction)
{
  if (cfg.gamma < 0.0)
    throw UsageError("focal loss gamma must be non-negative");
  check_labels(logits, labels);
  const double s = scale_of(reduction, logits.rows());
  const Matrix probs = softmax_rows(logits);
  LossResult r;
  r.grad.resize(logits.rows(), logits.cols());
  for (Index i = 0; i < logits.rows(); ++i) {
    const int t = labels[static_cast<std::size_t>(i)];
    const double a = cfg.alpha_of(t);
    const double p = probs(i, t);
    const double pc = std::max(p, kProbClamp);
    const double q = 1.0 - p;
    const double logp = std::log(pc);
    const double w = std::pow(q, cfg.gamma);
    r.value -= a * w * logp;
    // dFL/dp_t * p_t; the softmax Jacobian turns it into g (delta_tj - p_j).
    double g = a * cfg.gamma * focal_pow_m1(q, cfg.gamma) * p * logp;
    if (p >= kProbClamp)
      g -= a * w;
    for (Index j = 0; j < logits.cols(); ++j) {
      const double delta = j == t ? 1.0 : 0.0;
      r.grad(i, j) = g * (delta - probs(i, j)) * s;
    }
  }
  r.value *= s;
  return r;
}

LossResult cross_entropy_with_logits(const Matrix& logits, std::span<const int> labels,
                                     Reduction reduction)
{
  check_labels(logits, labels);
  const double s = scale_of(reduction, logits.rows());
  const Matrix probs = softmax_rows(logits);
  LossResult r;
  r.grad.resize(logits.rows(), logits.cols());
  for (Index i = 0; i < logits.rows(); ++i) {
    const int t = labels[static_cast<std::size_t>(i)];
    const double p = probs(i, t);
    r.value -= std::log(std::max(p, kProbClamp));
    const bool live = p >= kProbClamp;
    for (Index j = 0; j < logits.cols(); ++j) {
      const double delta = j == t ? 1.0 : 0.0;
      r.grad(i, j) = live ? (probs(i, j) - delta) * s : 0.0 * s;
    }
  }
  r.value *= s;
  return r;
}

LossResult spe_loss(std::span<const double> y, std::span<const double> yhat)
{
  if (y.size() != yhat.size())
    throw DataError("spe loss: size mismatch");
  if (y.empty())
    throw DataError("spe loss: empty input");
  const double n = static_cast<double>(y.size());
  LossResult r;
  r.grad.resize(static_cast<Index>(y.size()), 1);
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (!(y[i] > 0.0))
      throw DataError("spe loss: target must be positive");
    const double e = (y[i] - yhat[i]) / y[i];
    r.value += e * e;
    r.grad(static_cast<Index>(i), 0) = -2.0 * e / (y[i] * n);
  }
  r.value /= n;
  return r;
}

} // namespace paracap::nn
