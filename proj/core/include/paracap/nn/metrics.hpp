#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace paracap::nn {

struct ClassificationMetrics {
  double accuracy = 0.0;
  /// Per-class F1; NaN for classes absent from both predictions and labels.
  std::vector<double> f1;
  /// Unweighted mean over classes that occur in predictions or labels.
  double f1_macro = 0.0;
  /// confusion[label][pred]
  std::vector<std::vector<std::size_t>> confusion;
};

ClassificationMetrics classification_metrics(std::span<const int> pred,
                                             std::span<const int> label, int num_classes);

/// Mean absolute percentage error in percent. Throws DataError on empty
/// input or a non-positive target.
double mape(std::span<const double> y, std::span<const double> yhat);

} // namespace paracap::nn
