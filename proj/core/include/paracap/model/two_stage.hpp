#pragma once

#include "paracap/dataset.hpp"
#include "paracap/graph.hpp"
#include "paracap/model/gnn.hpp"
#include "paracap/nn/layers.hpp"
#include "paracap/nn/optim.hpp"

#include <nlohmann/json.hpp>

#include <array>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace paracap::model {

struct ModelConfig {
  Variant variant = Variant::SageMean;
  Index hidden = 64;
  /// 0 selects the variant default.
  int layers = 0;
  /// "auto" selects layer norm for GAT and batch norm otherwise.
  std::string norm = "auto";
  double dropout = 0.1;
  std::vector<Index> classifier_hidden = {64, 64};
  std::vector<Index> regressor_hidden = {128, 128, 64};
  double regressor_dropout = 0.5;
  /// Hidden widths of the None baseline regressors.
  std::vector<Index> baseline_hidden = {128, 128, 64};
  bool subckt_nodes = true;
  /// Upper edge of the open top class, used by placeholder regressors.
  double open_class_cap_ff = 1000.0;

  int effective_layers() const;
  nn::Norm effective_norm() const;
  /// Width of the stage-2 input: embedding plus raw net features.
  Index regressor_input() const;

  nlohmann::json to_json() const;
  static ModelConfig from_json(const nlohmann::json& j);
};

enum class LossKind { Focal, CrossEntropy };

const char* loss_name(LossKind k);
LossKind loss_from_name(const std::string& name);

struct TrainConfig {
  LossKind loss = LossKind::Focal;
  double gamma = 2.0;
  /// "inverse_frequency" (alpha_t = 1 / f_t) or "uniform" (alpha_t = 1).
  std::string alpha = "inverse_frequency";
  int epochs = 200;
  int patience = 20;
  nn::OptimizerConfig stage1;
  int stage2_epochs = 200;
  int stage2_patience = 20;
  int batch_size = 256;
  nn::OptimizerConfig stage2{1e-3, 1e-3, 5e-4};
  std::uint64_t seed = 0;
  /// Trains the regressor groups one after another instead of in threads.
  bool deterministic = false;

  nlohmann::json to_json() const;
  static TrainConfig from_json(const nlohmann::json& j);
};

/// Normalised features plus adjacency over global node ids.
struct GraphInput {
  Adjacency adj;
  FeatureSet features;
  Index nets = 0;
  Index devs = 0;
  Index subs = 0;
};

GraphInput make_input(const HeteroGraph& g, const NormalizationStats& stats);

/// Per-type projectors, GNN trunk and classification head.
class Classifier {
public:
  Classifier(const ModelConfig& cfg, std::uint64_t seed);

  /// Logits for the NET rows.
  Matrix forward(const GraphInput& in, bool train);
  void backward(const Matrix& dlogits);
  /// Trunk output for the NET rows of the last forward pass.
  const Matrix& embeddings() const { return emb_; }
  std::vector<nn::Param*> params();

  /// Eval-mode softmax probabilities; embeddings are refreshed.
  Matrix probabilities(const GraphInput& in);

private:
  struct Block {
    std::unique_ptr<GraphConv> conv;
    std::unique_ptr<nn::Layer> norm;
    nn::ReLU relu;
    std::unique_ptr<nn::Dropout> dropout;
  };

  ModelConfig cfg_;
  std::unique_ptr<nn::Mlp> proj_net_;
  std::unique_ptr<nn::Mlp> proj_dev_;
  std::unique_ptr<nn::Mlp> proj_sub_;
  std::vector<Block> blocks_;
  std::unique_ptr<nn::Mlp> head_;
  const GraphInput* input_ = nullptr;
  Matrix emb_;
};

/// MLP whose output is multiplied by a per-group target scale (fF); a group
/// without training nets keeps a constant placeholder output.
class Regressor {
public:
  Regressor(Index in, const std::vector<Index>& hidden, double dropout, std::uint64_t seed,
            const std::string& name);

  std::vector<double> predict(const Matrix& x);
  std::vector<nn::Param*> params();

  double scale() const { return scale_.value(0, 0); }
  void set_scale(double s) { scale_.value(0, 0) = s; }
  bool placeholder() const { return state_.value(0, 0) != 0.0; }
  void set_placeholder(double value_ff);

  nn::Mlp& mlp() { return *mlp_; }

private:
  std::unique_ptr<nn::Mlp> mlp_;
  nn::Param scale_;
  nn::Param state_;
};

struct RegressorReport {
  int klass = 0;
  std::size_t train_size = 0;
  std::size_t val_size = 0;
  int best_epoch = -1;
  int epochs_run = 0;
  double train_mape = 0.0;
  double val_mape = 0.0;
  double scale_ff = 0.0;
  bool placeholder = false;

  nlohmann::json to_json() const;
};

/// Minibatch SPE training with validation-MAPE epoch selection. Targets in fF.
RegressorReport train_regressor(Regressor& reg, const Matrix& x_train,
                                const std::vector<double>& y_train, const Matrix& x_val,
                                const std::vector<double>& y_val, const TrainConfig& cfg,
                                std::uint64_t seed);

struct EpochRecord {
  int epoch = 0;
  double lr = 0.0;
  double loss = 0.0;
  double train_accuracy = 0.0;
  double val_accuracy = 0.0;
  double val_f1_macro = 0.0;
};

struct Stage1Report {
  std::vector<EpochRecord> epochs;
  int best_epoch = -1;
  double best_val_f1_macro = 0.0;
  std::array<double, kNumClasses> alpha{};

  nlohmann::json to_json() const;
};

using EpochCallback = std::function<void(const EpochRecord&)>;

/// Full-graph training of the classifier on the train mask; keeps the epoch
/// with the best validation F1 macro. alpha_t = 1 / f_t over the train mask.
Stage1Report train_stage1(Classifier& clf, const GraphInput& in, const LabeledDataset& ds,
                          const TrainConfig& cfg, const EpochCallback& on_epoch = {});

struct Prediction {
  std::vector<int> klass;
  std::vector<double> ceff_ff;
  /// NET x classes; empty for the None baseline.
  Matrix probs;
};

struct TrainingReport {
  std::optional<Stage1Report> stage1;
  std::array<RegressorReport, kNumClasses> stage2;
  double seconds = 0.0;

  nlohmann::json to_json() const;
};

/// Regression floor applied to every prediction.
inline constexpr double kMinPredictionFf = 0.01;

/// Classifier plus five routed regressors, or five plain regressors for the
/// None baseline (routed by the ground-truth class).
class TwoStageModel {
public:
  TwoStageModel(const ModelConfig& cfg, std::uint64_t seed);

  const ModelConfig& config() const { return cfg_; }
  bool trained() const { return trained_; }
  bool is_baseline() const { return cfg_.variant == Variant::None; }
  const NormalizationStats& normalization() const { return norm_; }

  TrainingReport train(const LabeledDataset& ds, const TrainConfig& cfg,
                       const EpochCallback& on_epoch = {});

  /// Predictions for every net of `g`. The None baseline requires `oracle`
  /// classes (one per net) and routes by them.
  Prediction predict(const HeteroGraph& g, const std::vector<int>* oracle = nullptr);

  Classifier* classifier() { return clf_.get(); }
  Regressor& regressor(int k) { return *regs_[k]; }

  nlohmann::json to_json(const nlohmann::json& config_echo = {});
  static TwoStageModel from_json(const nlohmann::json& j);

private:
  HeteroGraph prepare(const HeteroGraph& g) const;
  Matrix stage2_input(const GraphInput& in, const Matrix& emb) const;
  std::vector<nn::Param*> all_params();

  ModelConfig cfg_;
  std::uint64_t seed_;
  NormalizationStats norm_;
  std::unique_ptr<Classifier> clf_;
  std::array<std::unique_ptr<Regressor>, kNumClasses> regs_;
  bool trained_ = false;
};

} // namespace paracap::model
