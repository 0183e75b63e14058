#include "paracap/error.hpp"
#include "paracap/nn/checkpoint.hpp"
#include "paracap/nn/metrics.hpp"
#include "paracap/nn/optim.hpp"

#include "testing.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace paracap;
using namespace paracap::nn;

TEST(CosineLr, EndpointsAndMidpoint)
{
  EXPECT_DOUBLE_EQ(cosine_lr(0, 200, 1e-3, 1e-4), 1e-3);
  EXPECT_DOUBLE_EQ(cosine_lr(200, 200, 1e-3, 1e-4), 1e-4);
  EXPECT_NEAR(cosine_lr(100, 200, 1e-3, 1e-4), 5.5e-4, 1e-15);
  EXPECT_DOUBLE_EQ(cosine_lr(500, 200, 1e-3, 1e-4), 1e-4);
}

TEST(CosineLr, MonotoneNonIncreasing)
{
  for (int total : {1, 7, 200}) {
    double prev = cosine_lr(0, total, 1e-3, 1e-4);
    for (int e = 1; e <= total; ++e) {
      const double lr = cosine_lr(e, total, 1e-3, 1e-4);
      EXPECT_LE(lr, prev);
      prev = lr;
    }
  }
}

TEST(AdamW, ZeroGradientZeroDecayLeavesParameters)
{
  Rng rng(1);
  Param p("p", uniform_matrix(3, 4, -1, 1, rng));
  const Matrix before = p.value;
  OptimizerConfig cfg;
  cfg.weight_decay = 0.0;
  AdamW opt(cfg);
  for (int i = 0; i < 5; ++i) {
    p.zero_grad();
    opt.step({&p}, 1e-3);
  }
  EXPECT_EQ(p.value, before);
  EXPECT_EQ(opt.steps(), 5);
}

TEST(AdamW, FirstStepMatchesClosedForm)
{
  Matrix init(1, 3);
  init << 0.5, -1.0, 2.0;
  Param p("p", init);
  p.grad << 0.1, -0.3, 0.0;
  OptimizerConfig cfg;
  AdamW opt(cfg);
  const double lr = 1e-2;
  opt.step({&p}, lr);
  for (Index j = 0; j < 3; ++j) {
    const double g = j == 0 ? 0.1 : (j == 1 ? -0.3 : 0.0);
    const double mhat = g;
    const double vhat = g * g;
    double want = init(0, j) - lr * cfg.weight_decay * init(0, j);
    want -= lr * mhat / (std::sqrt(vhat) + cfg.eps);
    EXPECT_NEAR(p.value(0, j), want, 1e-12) << j;
  }
}

TEST(AdamW, SkipsBuffers)
{
  Param buf("running", Matrix::Ones(1, 2), false);
  buf.grad.setConstant(1.0);
  AdamW opt;
  opt.step({&buf}, 1.0);
  EXPECT_EQ(buf.value, Matrix::Ones(1, 2));
}

TEST(Metrics, MapeExample)
{
  const std::vector<double> y = {2.0, 4.0};
  const std::vector<double> yhat = {1.0, 5.0};
  EXPECT_DOUBLE_EQ(mape(y, yhat), 37.5);
  EXPECT_DOUBLE_EQ(mape(y, y), 0.0);
  EXPECT_THROW(mape(std::vector<double>{}, std::vector<double>{}), DataError);
  EXPECT_THROW(mape(std::vector<double>{-1.0}, std::vector<double>{1.0}), DataError);
}

TEST(Metrics, HandConfusionMatrix)
{
  const std::vector<int> label = {0, 1, 1};
  const std::vector<int> pred = {0, 0, 1};
  const auto m = classification_metrics(pred, label, 5);
  EXPECT_NEAR(m.accuracy, 2.0 / 3.0, 1e-15);
  EXPECT_NEAR(m.f1[0], 2.0 / 3.0, 1e-15);
  EXPECT_NEAR(m.f1[1], 2.0 / 3.0, 1e-15);
  EXPECT_TRUE(std::isnan(m.f1[2]));
  EXPECT_NEAR(m.f1_macro, 2.0 / 3.0, 1e-15);
  EXPECT_EQ(m.confusion[1][0], 1u);
  EXPECT_EQ(m.confusion[0][0], 1u);
}

TEST(Metrics, AbsentFromLabelsButPredictedCountsAsZero)
{
  const std::vector<int> label = {0, 0, 0, 0};
  const std::vector<int> pred = {0, 0, 0, 2};
  const auto m = classification_metrics(pred, label, 5);
  EXPECT_NEAR(m.f1[0], 2.0 * 3.0 / (2.0 * 3.0 + 1.0), 1e-15);
  EXPECT_EQ(m.f1[2], 0.0);
  EXPECT_NEAR(m.f1_macro, (6.0 / 7.0) / 2.0, 1e-15);
}

TEST(Metrics, PerfectPredictions)
{
  const std::vector<int> v = {0, 1, 2, 3, 4, 4};
  const auto m = classification_metrics(v, v, 5);
  EXPECT_EQ(m.accuracy, 1.0);
  EXPECT_EQ(m.f1_macro, 1.0);
  EXPECT_THROW(classification_metrics(std::vector<int>{}, std::vector<int>{}, 5), DataError);
}

TEST(Checkpoint, ParamsRoundTripExactly)
{
  Rng rng(9);
  Param a("a", uniform_matrix(3, 2, -1, 1, rng));
  Param b("b", uniform_matrix(1, 5, -1e-300, 1e300, rng), false);
  const auto j = params_to_json({&a, &b});
  Param a2("a", Matrix::Zero(3, 2));
  Param b2("b", Matrix::Zero(1, 5), false);
  params_from_json(nlohmann::json::parse(j.dump()), {&a2, &b2});
  EXPECT_EQ(a2.value, a.value);
  EXPECT_EQ(b2.value, b.value);
  Param wrong("a", Matrix::Zero(2, 2));
  EXPECT_THROW(params_from_json(j, {&wrong}), DataError);
  Param missing("c", Matrix::Zero(1, 1));
  EXPECT_THROW(params_from_json(j, {&missing}), DataError);
}

TEST(Checkpoint, SnapshotRestore)
{
  Param a("a", Matrix::Ones(2, 2));
  const auto snap = snapshot({&a});
  a.value.setZero();
  restore({&a}, snap);
  EXPECT_EQ(a.value, Matrix::Ones(2, 2));
}

TEST(Rng, ReproducibleStreams)
{
  Rng a(123), b(123), c(124);
  for (int i = 0; i < 100; ++i) {
    const double x = a.normal();
    EXPECT_EQ(x, b.normal());
  }
  EXPECT_NE(Rng(123).next(), c.next());
  Rng u(5);
  for (int i = 0; i < 1000; ++i) {
    const double v = u.uniform();
    EXPECT_GE(v, 0.0);
    EXPECT_LT(v, 1.0);
  }
}
