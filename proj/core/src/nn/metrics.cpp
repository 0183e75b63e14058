#include "paracap/nn/metrics.hpp"
#include "paracap/error.hpp"

#include <cmath>
#include <limits>

namespace paracap::nn {

ClassificationMetrics classification_metrics(std::span<const int> pred,
                                             std::span<const int> label, int num_classes)
{
  if (pred.size() != label.size())
    throw DataError("metrics: prediction and label counts differ");
  if (pred.empty())
    throw DataError("metrics: empty input");
  ClassificationMetrics m;
  const auto k = static_cast<std::size_t>(num_classes);
  m.confusion.assign(k, std::vector<std::size_t>(k, 0));
  std::size_t correct = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (pred[i] < 0 || pred[i] >= num_classes || label[i] < 0 || label[i] >= num_classes)
      throw DataError("metrics: class out of range");
    ++m.confusion[static_cast<std::size_t>(label[i])][static_cast<std::size_t>(pred[i])];
    correct += pred[i] == label[i];
  }
  m.accuracy = static_cast<double>(correct) / static_cast<double>(pred.size());

  m.f1.assign(k, std::numeric_limits<double>::quiet_NaN());
  double sum = 0.0;
  int counted = 0;
  for (std::size_t c = 0; c < k; ++c) {
    const double tp = static_cast<double>(m.confusion[c][c]);
    double fp = 0.0;
    double fn = 0.0;
    for (std::size_t o = 0; o < k; ++o) {
      if (o == c)
        continue;
      fp += static_cast<double>(m.confusion[o][c]);
      fn += static_cast<double>(m.confusion[c][o]);
    }
    if (tp + fp + fn == 0.0)
      continue;
    m.f1[c] = 2.0 * tp / (2.0 * tp + fp + fn);
    sum += m.f1[c];
    ++counted;
  }
  m.f1_macro = sum / counted;
  return m;
}

double mape(std::span<const double> y, std::span<const double> yhat)
{
  if (y.size() != yhat.size())
    throw DataError("mape: size mismatch");
  if (y.empty())
    throw DataError("mape: empty input");
  double sum = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (!(y[i] > 0.0))
      throw DataError("mape: target must be positive");
    sum += std::abs((y[i] - yhat[i]) / y[i]);
  }
  return 100.0 * sum / static_cast<double>(y.size());
}

} // namespace paracap::nn
