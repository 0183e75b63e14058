#include "paracap/model/two_stage.hpp"
#include "paracap/error.hpp"
#include "paracap/nn/checkpoint.hpp"
#include "paracap/nn/loss.hpp"
#include "paracap/nn/metrics.hpp"
#include "paracap/units.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <thread>
#include <unordered_map>

namespace paracap::model {

namespace {

using Setters = std::unordered_map<std::string, std::function<void(const nlohmann::json&)>>;

void apply_keys(const nlohmann::json& j, const char* what, const Setters& setters)
{
  if (!j.is_object())
    throw UsageError(std::string(what) + " must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    auto it = setters.find(key);
    if (it == setters.end())
      throw UsageError("unknown " + std::string(what) + " key '" + key + "'");
    try {
      it->second(value);
    } catch (const nlohmann::json::exception&) {
      throw UsageError("bad value for " + std::string(what) + " key '" + key + "'");
    }
  }
}

nlohmann::json optimizer_to_json(const nn::OptimizerConfig& o)
{
  return {{"base_lr", o.base_lr}, {"min_lr", o.min_lr}, {"weight_decay", o.weight_decay},
          {"beta1", o.beta1},     {"beta2", o.beta2},   {"eps", o.eps}};
}

nn::OptimizerConfig optimizer_from_json(const nlohmann::json& j, nn::OptimizerConfig o)
{
  apply_keys(j, "optimizer config",
             {{"base_lr", [&](const auto& v) { o.base_lr = v.template get<double>(); }},
              {"min_lr", [&](const auto& v) { o.min_lr = v.template get<double>(); }},
              {"weight_decay", [&](const auto& v) { o.weight_decay = v.template get<double>(); }},
              {"beta1", [&](const auto& v) { o.beta1 = v.template get<double>(); }},
              {"beta2", [&](const auto& v) { o.beta2 = v.template get<double>(); }},
              {"eps", [&](const auto& v) { o.eps = v.template get<double>(); }}});
  if (!(o.base_lr > 0.0) || !(o.min_lr >= 0.0) || o.min_lr > o.base_lr)
    throw UsageError("learning rates must satisfy 0 <= min_lr <= base_lr, base_lr > 0");
  if (o.weight_decay < 0.0)
    throw UsageError("weight_decay must be non-negative");
  return o;
}

std::vector<int> argmax_rows(const Matrix& m)
{
  std::vector<int> out(static_cast<std::size_t>(m.rows()));
  for (Index i = 0; i < m.rows(); ++i) {
    Index k = 0;
    m.row(i).maxCoeff(&k);
    out[i] = static_cast<int>(k);
  }
  return out;
}

Matrix gather_rows(const Matrix& m, const std::vector<int>& rows)
{
  Matrix out(static_cast<Index>(rows.size()), m.cols());
  for (std::size_t i = 0; i < rows.size(); ++i)
    out.row(static_cast<Index>(i)) = m.row(rows[i]);
  return out;
}

std::vector<int> gather(const std::vector<int>& v, const std::vector<int>& rows)
{
  std::vector<int> out;
  out.reserve(rows.size());
  for (int r : rows)
    out.push_back(v[r]);
  return out;
}

std::vector<double> floored(std::vector<double> v)
{
  for (double& x : v)
    if (!(x >= kMinPredictionFf))
      x = kMinPredictionFf;
  return v;
}

std::vector<Index> widths(Index in, const std::vector<Index>& hidden, Index out)
{
  std::vector<Index> w{in};
  w.insert(w.end(), hidden.begin(), hidden.end());
  w.push_back(out);
  return w;
}

} // namespace

int ModelConfig::effective_layers() const
{
  return layers > 0 ? layers : default_layers(variant);
}

nn::Norm ModelConfig::effective_norm() const
{
  return norm == "auto" ? default_norm(variant) : nn::norm_from_name(norm);
}

Index ModelConfig::regressor_input() const
{
  const auto raw = static_cast<Index>(FeatureSchema::kNetWidth);
  return variant == Variant::None ? raw : hidden + raw;
}

nlohmann::json ModelConfig::to_json() const
{
  return {{"variant", variant_name(variant)},
          {"hidden", hidden},
          {"layers", effective_layers()},
          {"norm", nn::norm_name(effective_norm())},
          {"dropout", dropout},
          {"classifier_hidden", classifier_hidden},
          {"regressor_hidden", regressor_hidden},
          {"regressor_dropout", regressor_dropout},
          {"baseline_hidden", baseline_hidden},
          {"subckt_nodes", subckt_nodes},
          {"open_class_cap_ff", open_class_cap_ff}};
}

ModelConfig ModelConfig::from_json(const nlohmann::json& j)
{
  ModelConfig c;
  apply_keys(
      j, "model config",
      {{"variant", [&](const auto& v) { c.variant = variant_from_name(v.template get<std::string>()); }},
       {"hidden", [&](const auto& v) { c.hidden = v.template get<Index>(); }},
       {"layers", [&](const auto& v) { c.layers = v.template get<int>(); }},
       {"norm", [&](const auto& v) { c.norm = v.template get<std::string>(); }},
       {"dropout", [&](const auto& v) { c.dropout = v.template get<double>(); }},
       {"classifier_hidden",
        [&](const auto& v) { c.classifier_hidden = v.template get<std::vector<Index>>(); }},
       {"regressor_hidden",
        [&](const auto& v) { c.regressor_hidden = v.template get<std::vector<Index>>(); }},
       {"regressor_dropout", [&](const auto& v) { c.regressor_dropout = v.template get<double>(); }},
       {"baseline_hidden",
        [&](const auto& v) { c.baseline_hidden = v.template get<std::vector<Index>>(); }},
       {"subckt_nodes", [&](const auto& v) { c.subckt_nodes = v.template get<bool>(); }},
       {"open_class_cap_ff", [&](const auto& v) { c.open_class_cap_ff = v.template get<double>(); }}});
  if (c.hidden < 1 || c.layers < 0)
    throw UsageError("hidden must be >= 1 and layers >= 0");
  if (c.norm != "auto")
    nn::norm_from_name(c.norm);
  if (!(c.dropout >= 0.0 && c.dropout < 1.0) ||
      !(c.regressor_dropout >= 0.0 && c.regressor_dropout < 1.0))
    throw UsageError("dropout rates must lie in [0, 1)");
  if (!(c.open_class_cap_ff > 100.0))
    throw UsageError("open_class_cap_ff must exceed 100");
  return c;
}

const char* loss_name(LossKind k)
{
  return k == LossKind::Focal ? "focal" : "cross_entropy";
}

LossKind loss_from_name(const std::string& name)
{
  if (name == "focal")
    return LossKind::Focal;
  if (name == "cross_entropy" || name == "ce")
    return LossKind::CrossEntropy;
  throw UsageError("unknown loss '" + name + "'");
}

nlohmann::json TrainConfig::to_json() const
{
  return {{"loss", loss_name(loss)},
          {"gamma", gamma},
          {"alpha", alpha},
          {"epochs", epochs},
          {"patience", patience},
          {"stage1", optimizer_to_json(stage1)},
          {"stage2_epochs", stage2_epochs},
          {"stage2_patience", stage2_patience},
          {"batch_size", batch_size},
          {"stage2", optimizer_to_json(stage2)},
          {"seed", seed},
          {"deterministic", deterministic}};
}

TrainConfig TrainConfig::from_json(const nlohmann::json& j)
{
  TrainConfig c;
  apply_keys(
      j, "training config",
      {{"loss", [&](const auto& v) { c.loss = loss_from_name(v.template get<std::string>()); }},
       {"gamma", [&](const auto& v) { c.gamma = v.template get<double>(); }},
       {"alpha", [&](const auto& v) { c.alpha = v.template get<std::string>(); }},
       {"epochs", [&](const auto& v) { c.epochs = v.template get<int>(); }},
       {"patience", [&](const auto& v) { c.patience = v.template get<int>(); }},
       {"stage1", [&](const auto& v) { c.stage1 = optimizer_from_json(v, c.stage1); }},
       {"stage2_epochs", [&](const auto& v) { c.stage2_epochs = v.template get<int>(); }},
       {"stage2_patience", [&](const auto& v) { c.stage2_patience = v.template get<int>(); }},
       {"batch_size", [&](const auto& v) { c.batch_size = v.template get<int>(); }},
       {"stage2", [&](const auto& v) { c.stage2 = optimizer_from_json(v, c.stage2); }},
       {"seed", [&](const auto& v) { c.seed = v.template get<std::uint64_t>(); }},
       {"deterministic", [&](const auto& v) { c.deterministic = v.template get<bool>(); }}});
  if (!(c.gamma >= 0.0))
    throw UsageError("gamma must be non-negative");
  if (c.alpha != "inverse_frequency" && c.alpha != "uniform")
    throw UsageError("alpha must be 'inverse_frequency' or 'uniform'");
  if (c.epochs < 1 || c.stage2_epochs < 1 || c.patience < 1 || c.stage2_patience < 1 ||
      c.batch_size < 1)
    throw UsageError("epochs, patience and batch_size must be >= 1");
  return c;
}

GraphInput make_input(const HeteroGraph& g, const NormalizationStats& stats)
{
  GraphInput in;
  in.nets = static_cast<Index>(g.nets.size());
  in.devs = static_cast<Index>(g.devs.size());
  in.subs = static_cast<Index>(g.subs.size());
  in.adj = Adjacency::from_edges(static_cast<Index>(g.num_nodes()), g.edges);
  in.features = normalize(g, &stats).first;
  return in;
}

Classifier::Classifier(const ModelConfig& cfg, std::uint64_t seed) : cfg_(cfg)
{
  if (cfg.variant == Variant::None)
    throw UsageError("variant 'none' has no classifier");
  nn::Rng rng(seed);
  const nn::Norm norm = cfg.effective_norm();
  const Index h = cfg.hidden;
  auto projector = [&](std::size_t in, const std::string& name) {
    return std::make_unique<nn::Mlp>(nn::MlpSpec{{static_cast<Index>(in), h, h}, cfg.dropout, norm},
                                     rng, name);
  };
  proj_net_ = projector(FeatureSchema::kNetWidth, "proj_net");
  proj_dev_ = projector(FeatureSchema::kDevWidth, "proj_dev");
  proj_sub_ = projector(FeatureSchema::kSubWidth, "proj_sub");
  for (int l = 0; l < cfg.effective_layers(); ++l) {
    Block b;
    const std::string name = "conv" + std::to_string(l);
    b.conv = make_conv(cfg.variant, h, h, rng, name);
    b.norm = nn::make_norm(norm, h, name + ".norm");
    if (cfg.dropout > 0.0)
      b.dropout = std::make_unique<nn::Dropout>(cfg.dropout, rng.next());
    blocks_.push_back(std::move(b));
  }
  head_ = std::make_unique<nn::Mlp>(
      nn::MlpSpec{widths(h, cfg.classifier_hidden, kNumClasses), cfg.dropout, norm}, rng, "head");
}

Matrix Classifier::forward(const GraphInput& in, bool train)
{
  if (in.features.net.cols() != static_cast<Index>(FeatureSchema::kNetWidth) ||
      in.features.net.rows() != in.nets || in.adj.n != in.nets + in.devs + in.subs)
    throw DataError("classifier input does not match the feature schema");
  input_ = &in;
  Matrix h(in.adj.n, cfg_.hidden);
  h.topRows(in.nets) = proj_net_->forward(in.features.net, train);
  if (in.devs > 0)
    h.middleRows(in.nets, in.devs) = proj_dev_->forward(in.features.dev, train);
  if (in.subs > 0)
    h.bottomRows(in.subs) = proj_sub_->forward(in.features.sub, train);
  for (auto& b : blocks_) {
    h = b.conv->forward(in.adj, h);
    if (b.norm)
      h = b.norm->forward(h, train);
    h = b.relu.forward(h, train);
    if (b.dropout)
      h = b.dropout->forward(h, train);
  }
  emb_ = h.topRows(in.nets);
  Matrix logits = head_->forward(emb_, train);
  nn::check_finite(logits, "classifier forward");
  return logits;
}

void Classifier::backward(const Matrix& dlogits)
{
  if (input_ == nullptr)
    throw UsageError("classifier backward before forward");
  const GraphInput& in = *input_;
  Matrix dh = Matrix::Zero(in.adj.n, cfg_.hidden);
  dh.topRows(in.nets) = head_->backward(dlogits);
  for (auto it = blocks_.rbegin(); it != blocks_.rend(); ++it) {
    if (it->dropout)
      dh = it->dropout->backward(dh);
    dh = it->relu.backward(dh);
    if (it->norm)
      dh = it->norm->backward(dh);
    dh = it->conv->backward(dh);
  }
  nn::check_finite(dh, "classifier backward");
  proj_net_->backward(dh.topRows(in.nets));
  if (in.devs > 0)
    proj_dev_->backward(dh.middleRows(in.nets, in.devs));
  if (in.subs > 0)
    proj_sub_->backward(dh.bottomRows(in.subs));
}

std::vector<nn::Param*> Classifier::params()
{
  std::vector<nn::Param*> out;
  auto add = [&](const std::vector<nn::Param*>& ps) { out.insert(out.end(), ps.begin(), ps.end()); };
  add(proj_net_->params());
  add(proj_dev_->params());
  add(proj_sub_->params());
  for (auto& b : blocks_) {
    add(b.conv->params());
    if (b.norm)
      add(b.norm->params());
  }
  add(head_->params());
  return out;
}

Matrix Classifier::probabilities(const GraphInput& in)
{
  return nn::softmax_rows(forward(in, false));
}

Regressor::Regressor(Index in, const std::vector<Index>& hidden, double dropout,
                     std::uint64_t seed, const std::string& name)
    : scale_(name + ".scale", Matrix::Ones(1, 1), false),
      state_(name + ".placeholder", Matrix::Zero(1, 2), false)
{
  nn::Rng rng(seed);
  mlp_ = std::make_unique<nn::Mlp>(nn::MlpSpec{widths(in, hidden, 1), dropout, nn::Norm::None},
                                   rng, name);
  mlp_->last_linear().bias().value.setOnes();
}

std::vector<double> Regressor::predict(const Matrix& x)
{
  const auto n = static_cast<std::size_t>(x.rows());
  if (placeholder())
    return std::vector<double>(n, state_.value(0, 1));
  std::vector<double> out(n);
  if (n == 0)
    return out;
  const Matrix r = mlp_->forward(x, false);
  nn::check_finite(r, "regressor forward");
  for (std::size_t i = 0; i < n; ++i)
    out[i] = scale() * r(static_cast<Index>(i), 0);
  return out;
}

std::vector<nn::Param*> Regressor::params()
{
  auto ps = mlp_->params();
  ps.push_back(&scale_);
  ps.push_back(&state_);
  return ps;
}

void Regressor::set_placeholder(double value_ff)
{
  state_.value(0, 0) = 1.0;
  state_.value(0, 1) = value_ff;
}

nlohmann::json RegressorReport::to_json() const
{
  return {{"class", klass},           {"train_size", train_size},
          {"val_size", val_size},     {"best_epoch", best_epoch},
          {"epochs_run", epochs_run}, {"train_mape", train_mape},
          {"val_mape", val_mape},     {"scale_ff", scale_ff},
          {"placeholder", placeholder}};
}

RegressorReport train_regressor(Regressor& reg, const Matrix& x_train,
                                const std::vector<double>& y_train, const Matrix& x_val,
                                const std::vector<double>& y_val, const TrainConfig& cfg,
                                std::uint64_t seed)
{
  RegressorReport rep;
  rep.train_size = y_train.size();
  rep.val_size = y_val.size();
  if (y_train.empty())
    throw DataError("regressor group has no training samples");
  if (x_train.rows() != static_cast<Index>(y_train.size()) ||
      x_val.rows() != static_cast<Index>(y_val.size()))
    throw DataError("regressor inputs and targets differ in length");
  double log_sum = 0.0;
  for (double y : y_train) {
    if (!(y > 0.0))
      throw DataError("regression target must be positive");
    log_sum += std::log(y);
  }
  reg.set_scale(std::exp(log_sum / static_cast<double>(y_train.size())));
  rep.scale_ff = reg.scale();

  const bool have_val = !y_val.empty();
  const Matrix& x_sel = have_val ? x_val : x_train;
  const std::vector<double>& y_sel = have_val ? y_val : y_train;

  nn::Rng rng(seed);
  nn::AdamW opt(cfg.stage2);
  auto params = reg.mlp().params();
  std::vector<int> order(y_train.size());
  std::iota(order.begin(), order.end(), 0);
  const auto batch = static_cast<std::size_t>(cfg.batch_size);
  double best = std::numeric_limits<double>::infinity();
  std::vector<Matrix> best_values = nn::snapshot(params);
  int since = 0;
  for (int e = 0; e < cfg.stage2_epochs; ++e) {
    const double lr = nn::cosine_lr(e, cfg.stage2_epochs, cfg.stage2.base_lr, cfg.stage2.min_lr);
    for (std::size_t i = order.size(); i > 1; --i)
      std::swap(order[i - 1], order[rng.index(i)]);
    for (std::size_t start = 0; start < order.size(); start += batch) {
      const std::size_t stop = std::min(order.size(), start + batch);
      const std::vector<int> rows(order.begin() + static_cast<std::ptrdiff_t>(start),
                                  order.begin() + static_cast<std::ptrdiff_t>(stop));
      std::vector<double> y(rows.size());
      for (std::size_t i = 0; i < rows.size(); ++i)
        y[i] = y_train[rows[i]];
      nn::zero_grad(params);
      const Matrix r = reg.mlp().forward(gather_rows(x_train, rows), true);
      std::vector<double> yhat(rows.size());
      for (std::size_t i = 0; i < rows.size(); ++i)
        yhat[i] = reg.scale() * r(static_cast<Index>(i), 0);
      nn::LossResult loss = nn::spe_loss(y, yhat);
      loss.grad *= reg.scale();
      nn::check_finite(loss.grad, "regressor loss");
      reg.mlp().backward(loss.grad);
      opt.step(params, lr);
    }
    rep.epochs_run = e + 1;
    const double m = nn::mape(y_sel, floored(reg.predict(x_sel)));
    if (m < best) {
      best = m;
      best_values = nn::snapshot(params);
      rep.best_epoch = e;
      since = 0;
    } else if (++since >= cfg.stage2_patience) {
      break;
    }
  }
  nn::restore(params, best_values);
  rep.train_mape = nn::mape(y_train, floored(reg.predict(x_train)));
  rep.val_mape = have_val ? nn::mape(y_val, floored(reg.predict(x_val))) : rep.train_mape;
  return rep;
}

nlohmann::json Stage1Report::to_json() const
{
  nlohmann::json ep = nlohmann::json::array();
  for (const auto& r : epochs)
    ep.push_back({{"epoch", r.epoch},
                  {"lr", r.lr},
                  {"loss", r.loss},
                  {"train_accuracy", r.train_accuracy},
                  {"val_accuracy", r.val_accuracy},
                  {"val_f1_macro", r.val_f1_macro}});
  return {{"best_epoch", best_epoch},
          {"best_val_f1_macro", best_val_f1_macro},
          {"alpha", alpha},
          {"epochs", ep}};
}

Stage1Report train_stage1(Classifier& clf, const GraphInput& in, const LabeledDataset& ds,
                          const TrainConfig& cfg, const EpochCallback& on_epoch)
{
  const auto& train = ds.masks.train;
  if (train.empty())
    throw DataError("training mask is empty");
  const std::vector<int> y_train = gather(ds.klass, train);
  for (int y : y_train)
    if (y < 0 || y >= kNumClasses)
      throw DataError("training net without a class label");
  const auto& val = ds.masks.val.empty() ? train : ds.masks.val;
  const std::vector<int> y_val = gather(ds.klass, val);

  Stage1Report rep;
  nn::FocalLossConfig focal;
  focal.gamma = cfg.gamma;
  if (cfg.alpha == "uniform") {
    rep.alpha.fill(1.0);
  } else {
    rep.alpha = inverse_frequency_weights(class_freqs(y_train));
  }
  focal.alpha.assign(rep.alpha.begin(), rep.alpha.end());

  nn::AdamW opt(cfg.stage1);
  const auto params = clf.params();
  std::vector<Matrix> best_values = nn::snapshot(params);
  rep.best_val_f1_macro = -1.0;
  int since = 0;
  for (int e = 0; e < cfg.epochs; ++e) {
    EpochRecord r;
    r.epoch = e;
    r.lr = nn::cosine_lr(e, cfg.epochs, cfg.stage1.base_lr, cfg.stage1.min_lr);
    nn::zero_grad(params);
    const Matrix logits = clf.forward(in, true);
    const Matrix sub = gather_rows(logits, train);
    const nn::LossResult loss = cfg.loss == LossKind::Focal
                                    ? nn::focal_loss_with_logits(sub, y_train, focal)
                                    : nn::cross_entropy_with_logits(sub, y_train);
    r.loss = loss.value;
    if (!std::isfinite(r.loss))
      throw NumericError("non-finite stage-1 loss at epoch " + std::to_string(e));
    Matrix dlogits = Matrix::Zero(logits.rows(), logits.cols());
    for (std::size_t i = 0; i < train.size(); ++i)
      dlogits.row(train[i]) = loss.grad.row(static_cast<Index>(i));
    clf.backward(dlogits);
    opt.step(params, r.lr);

    const std::vector<int> pred = argmax_rows(clf.forward(in, false));
    r.train_accuracy = nn::classification_metrics(gather(pred, train), y_train, kNumClasses).accuracy;
    const auto vm = nn::classification_metrics(gather(pred, val), y_val, kNumClasses);
    r.val_accuracy = vm.accuracy;
    r.val_f1_macro = vm.f1_macro;
    rep.epochs.push_back(r);
    if (on_epoch)
      on_epoch(r);
    if (r.val_f1_macro > rep.best_val_f1_macro) {
      rep.best_val_f1_macro = r.val_f1_macro;
      rep.best_epoch = e;
      best_values = nn::snapshot(params);
      since = 0;
    } else if (++since >= cfg.patience) {
      break;
    }
  }
  nn::restore(params, best_values);
  return rep;
}

nlohmann::json TrainingReport::to_json() const
{
  nlohmann::json s2 = nlohmann::json::array();
  for (const auto& r : stage2)
    s2.push_back(r.to_json());
  return {{"stage1", stage1 ? stage1->to_json() : nlohmann::json(nullptr)}, {"stage2", s2}};
}

TwoStageModel::TwoStageModel(const ModelConfig& cfg, std::uint64_t seed) : cfg_(cfg), seed_(seed)
{
  nn::Rng rng(seed);
  if (!is_baseline())
    clf_ = std::make_unique<Classifier>(cfg, rng.next());
  const auto& hidden = is_baseline() ? cfg.baseline_hidden : cfg.regressor_hidden;
  for (int k = 0; k < kNumClasses; ++k)
    regs_[k] = std::make_unique<Regressor>(cfg.regressor_input(), hidden, cfg.regressor_dropout,
                                           rng.next(), "reg" + std::to_string(k));
}

HeteroGraph TwoStageModel::prepare(const HeteroGraph& g) const
{
  return cfg_.subckt_nodes ? g : drop_subckt_nodes(g);
}

Matrix TwoStageModel::stage2_input(const GraphInput& in, const Matrix& emb) const
{
  if (is_baseline())
    return in.features.net;
  Matrix x(in.nets, cfg_.regressor_input());
  x.leftCols(cfg_.hidden) = emb;
  x.rightCols(in.features.net.cols()) = in.features.net;
  return x;
}

TrainingReport TwoStageModel::train(const LabeledDataset& ds, const TrainConfig& cfg,
                                    const EpochCallback& on_epoch)
{
  const auto t0 = std::chrono::steady_clock::now();
  const HeteroGraph g = prepare(ds.graph);
  norm_ = compute_normalization(g);
  const GraphInput in = make_input(g, norm_);

  TrainingReport rep;
  std::vector<int> route;
  Matrix x;
  if (is_baseline()) {
    route = ds.klass;
    x = stage2_input(in, Matrix());
  } else {
    rep.stage1 = train_stage1(*clf_, in, ds, cfg, on_epoch);
    route = argmax_rows(clf_->probabilities(in));
    x = stage2_input(in, clf_->embeddings());
  }

  std::array<std::vector<int>, kNumClasses> train_rows;
  std::array<std::vector<int>, kNumClasses> val_rows;
  for (int i : ds.masks.train)
    if (route[i] >= 0)
      train_rows[route[i]].push_back(i);
  for (int i : ds.masks.val)
    if (route[i] >= 0)
      val_rows[route[i]].push_back(i);
  bool any = false;
  for (const auto& rows : train_rows)
    any = any || !rows.empty();
  if (!any)
    throw DataError("every regressor group is empty");

  nn::Rng rng(cfg.seed ^ 0x5851f42d4c957f2dULL);
  std::array<std::uint64_t, kNumClasses> seeds{};
  for (auto& s : seeds)
    s = rng.next();
  auto targets = [&](const std::vector<int>& rows) {
    std::vector<double> y;
    y.reserve(rows.size());
    for (int i : rows)
      y.push_back(ds.ceff[i] / kFemto);
    return y;
  };
  auto run = [&](int k) {
    RegressorReport& r = rep.stage2[k];
    if (train_rows[k].empty()) {
      regs_[k]->set_placeholder(class_midpoint_ff(k, cfg_.open_class_cap_ff));
      r.klass = k;
      r.val_size = val_rows[k].size();
      r.placeholder = true;
      r.scale_ff = class_midpoint_ff(k, cfg_.open_class_cap_ff);
      return;
    }
    r = train_regressor(*regs_[k], gather_rows(x, train_rows[k]), targets(train_rows[k]),
                        gather_rows(x, val_rows[k]), targets(val_rows[k]), cfg, seeds[k]);
    r.klass = k;
  };
  if (cfg.deterministic) {
    for (int k = 0; k < kNumClasses; ++k)
      run(k);
  } else {
    std::vector<std::exception_ptr> errors(kNumClasses);
    std::vector<std::thread> pool;
    for (int k = 0; k < kNumClasses; ++k)
      pool.emplace_back([&, k] {
        try {
          run(k);
        } catch (...) {
          errors[k] = std::current_exception();
        }
      });
    for (auto& t : pool)
      t.join();
    for (auto& e : errors)
      if (e)
        std::rethrow_exception(e);
  }
  trained_ = true;
  rep.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rep;
}

Prediction TwoStageModel::predict(const HeteroGraph& g, const std::vector<int>* oracle)
{
  if (!trained_)
    throw UsageError("model is not trained");
  const HeteroGraph gp = prepare(g);
  const GraphInput in = make_input(gp, norm_);
  Prediction p;
  Matrix x;
  if (is_baseline()) {
    if (oracle == nullptr || oracle->size() != gp.nets.size())
      throw UsageError("the none baseline routes by ground-truth classes, one per net");
    p.klass = *oracle;
    for (int k : p.klass)
      if (k < 0 || k >= kNumClasses)
        throw DataError("oracle class out of range");
    x = in.features.net;
  } else {
    p.probs = clf_->probabilities(in);
    p.klass = argmax_rows(p.probs);
    x = stage2_input(in, clf_->embeddings());
  }
  p.ceff_ff.assign(gp.nets.size(), 0.0);
  for (int k = 0; k < kNumClasses; ++k) {
    std::vector<int> rows;
    for (std::size_t i = 0; i < p.klass.size(); ++i)
      if (p.klass[i] == k)
        rows.push_back(static_cast<int>(i));
    const auto y = floored(regs_[k]->predict(gather_rows(x, rows)));
    for (std::size_t i = 0; i < rows.size(); ++i)
      p.ceff_ff[rows[i]] = y[i];
  }
  return p;
}

std::vector<nn::Param*> TwoStageModel::all_params()
{
  std::vector<nn::Param*> out;
  if (clf_)
    out = clf_->params();
  for (auto& r : regs_)
    for (nn::Param* p : r->params())
      out.push_back(p);
  return out;
}

nlohmann::json TwoStageModel::to_json(const nlohmann::json& config_echo)
{
  if (!trained_)
    throw UsageError("refusing to save an untrained model");
  return {{"format", "paracap-model"},
          {"version", 1},
          {"model", cfg_.to_json()},
          {"seed", seed_},
          {"normalization", normalization_to_json(norm_)},
          {"params", nn::params_to_json(all_params())},
          {"config", config_echo}};
}

TwoStageModel TwoStageModel::from_json(const nlohmann::json& j)
{
  try {
    if (j.at("format").get<std::string>() != "paracap-model" || j.at("version").get<int>() != 1)
      throw DataError("not a version-1 paracap model checkpoint");
    TwoStageModel m(ModelConfig::from_json(j.at("model")), j.at("seed").get<std::uint64_t>());
    m.norm_ = normalization_from_json(j.at("normalization"));
    nn::params_from_json(j.at("params"), m.all_params());
    m.trained_ = true;
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed model checkpoint: ") + e.what());
  }
}

} // namespace paracap::model
