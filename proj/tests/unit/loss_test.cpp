#include "paracap/error.hpp"
#include "paracap/nn/layers.hpp"
#include "paracap/nn/loss.hpp"

#include "testing.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace paracap;
using namespace paracap::nn;

namespace {

std::vector<int> random_labels(Index n, int classes, Rng& rng)
{
  std::vector<int> out(static_cast<std::size_t>(n));
  for (auto& t : out)
    t = static_cast<int>(rng.index(static_cast<std::size_t>(classes)));
  return out;
}

} // namespace

TEST(FocalLoss, HalfProbabilityGammaTwo)
{
  Matrix p(1, 2);
  p << 0.5, 0.5;
  const std::vector<int> t = {0};
  const LossResult r = focal_loss(p, t, {2.0, {}});
  EXPECT_NEAR(r.value, 0.25 * std::log(2.0), 1e-15);
  EXPECT_NEAR(r.value, 0.173287, 1e-6);
}

TEST(FocalLoss, NonNegativeAndZeroOnlyWhenCertain)
{
  Rng rng(1);
  for (int trial = 0; trial < 20; ++trial) {
    const Matrix p = softmax_rows(uniform_matrix(6, 5, -3, 3, rng));
    const auto t = random_labels(6, 5, rng);
    EXPECT_GT(focal_loss(p, t, {2.0, {}}).value, 0.0);
  }
  Matrix certain = Matrix::Zero(2, 3);
  certain(0, 1) = 1.0;
  certain(1, 2) = 1.0;
  const std::vector<int> t = {1, 2};
  EXPECT_EQ(focal_loss(certain, t, {2.0, {}}).value, 0.0);
}

TEST(FocalLoss, GammaZeroUnitAlphaIsCrossEntropy)
{
  Rng rng(2);
  for (int trial = 0; trial < 50; ++trial) {
    const Matrix z = uniform_matrix(8, 5, -4, 4, rng);
    const auto t = random_labels(8, 5, rng);
    const FocalLossConfig cfg{0.0, {1, 1, 1, 1, 1}};
    for (Reduction red : {Reduction::Sum, Reduction::Mean}) {
      const LossResult f = focal_loss_with_logits(z, t, cfg, red);
      const LossResult c = cross_entropy_with_logits(z, t, red);
      EXPECT_NEAR(f.value, c.value, 1e-9);
      EXPECT_LT(testkit::max_abs_diff(f.grad, c.grad), 1e-9);
    }
  }
}

TEST(FocalLoss, InverseFrequencyAlphaBalancesClasses)
{
  const std::vector<double> freqs = {0.5, 0.25, 0.125, 0.0625, 0.0625};
  FocalLossConfig cfg;
  for (double f : freqs)
    cfg.alpha.push_back(1.0 / f);
  for (int t = 0; t < 5; ++t)
    EXPECT_DOUBLE_EQ(cfg.alpha_of(t) * freqs[t], 1.0);
  EXPECT_DOUBLE_EQ(FocalLossConfig{}.alpha_of(3), 1.0);
}

namespace {

template <class Loss>
double grad_error(Loss loss, Matrix x)
{
  const LossResult r = loss(x);
  const Matrix num = testkit::numeric_gradient([&] { return loss(x).value; }, x);
  return testkit::relative_error(r.grad, num);
}

} // namespace

TEST(LossGrad, FocalOnProbabilities)
{
  Rng rng(3);
  for (double gamma : {0.0, 0.5, 2.0, 5.0}) {
    const Matrix p = softmax_rows(uniform_matrix(6, 5, -2, 2, rng));
    const auto t = random_labels(6, 5, rng);
    const FocalLossConfig cfg{gamma, {2.0, 0.5, 1.0, 4.0, 3.0}};
    EXPECT_LT(grad_error([&](const Matrix& x) { return focal_loss(x, t, cfg); }, p), 1e-4)
        << "gamma " << gamma;
  }
}

TEST(LossGrad, FocalAndCrossEntropyWithLogits)
{
  Rng rng(4);
  for (int trial = 0; trial < 5; ++trial) {
    const Matrix z = uniform_matrix(7, 5, -3, 3, rng);
    const auto t = random_labels(7, 5, rng);
    const FocalLossConfig cfg{2.0, {1.0, 2.0, 8.0, 16.0, 0.5}};
    EXPECT_LT(grad_error([&](const Matrix& x) { return focal_loss_with_logits(x, t, cfg); }, z),
              1e-4);
    EXPECT_LT(grad_error([&](const Matrix& x) { return cross_entropy_with_logits(x, t); }, z),
              1e-4);
  }
}

TEST(SpeLoss, KnownValueAndGradient)
{
  const std::vector<double> y = {2.0};
  const std::vector<double> yhat = {1.0};
  const LossResult r = spe_loss(y, yhat);
  EXPECT_DOUBLE_EQ(r.value, 0.25);
  ASSERT_EQ(r.grad.rows(), 1);
  EXPECT_DOUBLE_EQ(r.grad(0, 0), -2.0 * (2.0 - 1.0) / 4.0);
}

TEST(SpeLoss, ScaleInvariantAndGradChecked)
{
  Rng rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> y(6), yhat(6);
    for (std::size_t i = 0; i < y.size(); ++i) {
      y[i] = rng.uniform(0.01, 10.0);
      yhat[i] = rng.uniform(0.01, 10.0);
    }
    const double base = spe_loss(y, yhat).value;
    for (double k : {1e-15, 1e-3, 7.0, 1e12}) {
      std::vector<double> ys = y, hs = yhat;
      for (std::size_t i = 0; i < y.size(); ++i) {
        ys[i] *= k;
        hs[i] *= k;
      }
      EXPECT_NEAR(spe_loss(ys, hs).value, base, 1e-12 * std::max(1.0, base));
    }
    Matrix h(6, 1);
    for (std::size_t i = 0; i < 6; ++i)
      h(static_cast<Index>(i), 0) = yhat[i];
    EXPECT_LT(grad_error(
                  [&](const Matrix& x) {
                    return spe_loss(y, std::span<const double>(x.data(), static_cast<std::size_t>(x.size())));
                  },
                  h),
              1e-4);
  }
}

TEST(SpeLoss, RejectsNonPositiveTargets)
{
  const std::vector<double> y = {1.0, 0.0};
  const std::vector<double> yhat = {1.0, 1.0};
  EXPECT_THROW(spe_loss(y, yhat), DataError);
}
