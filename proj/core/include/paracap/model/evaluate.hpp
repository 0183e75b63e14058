#pragma once

#include "paracap/dataset.hpp"
#include "paracap/model/two_stage.hpp"
#include "paracap/nn/metrics.hpp"

#include <nlohmann/json.hpp>

#include <array>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace paracap::model {

/// Test-mask scores of one model (or the seed average of several).
struct MetricsReport {
  Variant variant = Variant::SageMean;
  /// True for the None baseline, which routes by the ground-truth class.
  bool oracle_routing = false;
  std::optional<double> accuracy;
  std::optional<double> f1_macro;
  /// MAPE (%) of the test nets whose predicted class is t; empty when none.
  std::array<std::optional<double>, kNumClasses> class_mape;
  std::array<std::size_t, kNumClasses> class_count{};
  double mape_all = 0.0;
  std::size_t test_nets = 0;
  std::size_t runs = 1;
  std::optional<nn::ClassificationMetrics> classification;

  nlohmann::json to_json() const;
};

/// Display name used in report tables (None, GAT, GCN, SAGE_mean, SAGE_pool).
const char* variant_label(Variant v);

/// Scores a prediction over the test mask of `ds`.
MetricsReport score(const Prediction& p, const LabeledDataset& ds, Variant variant);

/// Predicts with `model` on ds.graph and scores the test mask.
MetricsReport evaluate(TwoStageModel& model, const LabeledDataset& ds);

/// Cell-wise mean over runs of one variant; a class cell is averaged over
/// the runs that populate it.
MetricsReport average(const std::vector<MetricsReport>& runs);

/// Rows in the order None, GAT, GCN, SAGE_mean, SAGE_pool.
std::vector<MetricsReport> table_order(std::vector<MetricsReport> rows);

/// Fixed-width comparison table with a routing footer.
std::string format_table(const std::vector<MetricsReport>& rows);
nlohmann::json table_to_json(const std::vector<MetricsReport>& rows);

struct SweepConfig {
  std::vector<Variant> variants;
  std::vector<std::uint64_t> seeds = {0};
  ModelConfig model;
  TrainConfig train;
};

using ProgressCallback = std::function<void(const std::string&)>;

/// Trains every variant once per seed and averages the test scores.
std::vector<MetricsReport> run_sweep(const LabeledDataset& ds, const SweepConfig& cfg,
                                     const ProgressCallback& progress = {});

struct AblationCell {
  Variant variant = Variant::SageMean;
  LossKind loss = LossKind::Focal;
  bool subckt_nodes = true;
  /// Test F1 macro of the classifier, one entry per seed.
  std::vector<double> f1_macro;
  std::vector<double> accuracy;

  double mean_f1() const;
  double mean_accuracy() const;
};

struct AblationReport {
  std::vector<AblationCell> cells;
  std::vector<std::uint64_t> seeds;

  const AblationCell* find(Variant v, LossKind loss, bool subckt_nodes) const;
  nlohmann::json to_json() const;
  std::string format() const;
};

/// Stage-1 only: focal vs cross-entropy, with and (optionally) without
/// subcircuit nodes, for each GNN variant and seed.
AblationReport run_ablation(const LabeledDataset& ds, const SweepConfig& cfg,
                            bool sub_axis = true, const ProgressCallback& progress = {});

} // namespace paracap::model
