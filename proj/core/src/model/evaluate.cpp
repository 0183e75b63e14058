#include "paracap/model/evaluate.hpp"
#include "paracap/error.hpp"
#include "paracap/units.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>

namespace paracap::model {

namespace {

nlohmann::json opt_json(const std::optional<double>& v)
{
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

std::string cell(const std::optional<double>& v, int decimals)
{
  if (!v)
    return "-";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, *v);
  return buf;
}

int order_of(Variant v)
{
  switch (v) {
  case Variant::None: return 0;
  case Variant::Gat: return 1;
  case Variant::Gcn: return 2;
  case Variant::SageMean: return 3;
  case Variant::SagePool: return 4;
  }
  return 5;
}

double mean(const std::vector<double>& v)
{
  if (v.empty())
    return std::nan("");
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

} // namespace

const char* variant_label(Variant v)
{
  switch (v) {
  case Variant::None: return "None";
  case Variant::Gat: return "GAT";
  case Variant::Gcn: return "GCN";
  case Variant::SageMean: return "SAGE_mean";
  case Variant::SagePool: return "SAGE_pool";
  }
  return "?";
}

nlohmann::json MetricsReport::to_json() const
{
  nlohmann::json cm = nlohmann::json::array();
  nlohmann::json counts = nlohmann::json::array();
  for (int k = 0; k < kNumClasses; ++k) {
    cm.push_back(opt_json(class_mape[k]));
    counts.push_back(class_count[k]);
  }
  nlohmann::json j = {{"variant", variant_name(variant)},
                      {"oracle_routing", oracle_routing},
                      {"accuracy", opt_json(accuracy)},
                      {"f1_macro", opt_json(f1_macro)},
                      {"class_mape", cm},
                      {"class_count", counts},
                      {"mape_all", mape_all},
                      {"test_nets", test_nets},
                      {"runs", runs}};
  if (classification) {
    nlohmann::json f1 = nlohmann::json::array();
    for (double f : classification->f1)
      f1.push_back(std::isnan(f) ? nlohmann::json(nullptr) : nlohmann::json(f));
    j["per_class_f1"] = f1;
    j["confusion"] = classification->confusion;
  }
  return j;
}

MetricsReport score(const Prediction& p, const LabeledDataset& ds, Variant variant)
{
  const auto& test = ds.masks.test;
  if (test.empty())
    throw DataError("test mask is empty");
  if (p.klass.size() != ds.graph.nets.size() || p.ceff_ff.size() != ds.graph.nets.size())
    throw DataError("prediction does not cover every net");
  MetricsReport r;
  r.variant = variant;
  r.oracle_routing = variant == Variant::None;
  r.test_nets = test.size();
  std::vector<int> pred;
  std::vector<int> label;
  std::vector<double> y;
  std::vector<double> yhat;
  std::array<std::vector<double>, kNumClasses> yk;
  std::array<std::vector<double>, kNumClasses> yhatk;
  for (int i : test) {
    if (ds.klass[i] < 0)
      throw DataError("test net '" + ds.graph.nets[i].name + "' has no label");
    pred.push_back(p.klass[i]);
    label.push_back(ds.klass[i]);
    y.push_back(ds.ceff[i] / kFemto);
    yhat.push_back(p.ceff_ff[i]);
    yk[p.klass[i]].push_back(y.back());
    yhatk[p.klass[i]].push_back(yhat.back());
  }
  if (!r.oracle_routing) {
    r.classification = nn::classification_metrics(pred, label, kNumClasses);
    r.accuracy = r.classification->accuracy;
    r.f1_macro = r.classification->f1_macro;
  }
  for (int k = 0; k < kNumClasses; ++k) {
    r.class_count[k] = yk[k].size();
    if (!yk[k].empty())
      r.class_mape[k] = nn::mape(yk[k], yhatk[k]);
  }
  r.mape_all = nn::mape(y, yhat);
  return r;
}

MetricsReport evaluate(TwoStageModel& model, const LabeledDataset& ds)
{
  if (model.is_baseline()) {
    std::vector<int> oracle = ds.klass;
    for (int& k : oracle)
      k = std::max(k, 0);
    return score(model.predict(ds.graph, &oracle), ds, Variant::None);
  }
  return score(model.predict(ds.graph), ds, model.config().variant);
}

MetricsReport average(const std::vector<MetricsReport>& runs)
{
  if (runs.empty())
    throw DataError("no runs to average");
  if (runs.size() == 1)
    return runs.front();
  MetricsReport r;
  r.variant = runs.front().variant;
  r.oracle_routing = runs.front().oracle_routing;
  r.runs = runs.size();
  r.test_nets = runs.front().test_nets;
  auto avg = [&](auto get) -> std::optional<double> {
    std::vector<double> v;
    for (const auto& x : runs)
      if (auto o = get(x))
        v.push_back(*o);
    if (v.empty())
      return std::nullopt;
    return mean(v);
  };
  r.accuracy = avg([](const MetricsReport& x) { return x.accuracy; });
  r.f1_macro = avg([](const MetricsReport& x) { return x.f1_macro; });
  for (int k = 0; k < kNumClasses; ++k) {
    r.class_mape[k] = avg([k](const MetricsReport& x) { return x.class_mape[k]; });
    std::size_t total = 0;
    for (const auto& x : runs)
      total += x.class_count[k];
    r.class_count[k] = (total + runs.size() / 2) / runs.size();
  }
  r.mape_all = *avg([](const MetricsReport& x) { return std::optional<double>(x.mape_all); });
  return r;
}

std::vector<MetricsReport> table_order(std::vector<MetricsReport> rows)
{
  std::stable_sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) {
    return order_of(a.variant) < order_of(b.variant);
  });
  return rows;
}

std::string format_table(const std::vector<MetricsReport>& rows)
{
  std::ostringstream out;
  char line[256];
  std::snprintf(line, sizeof line, "%-10s %9s %9s %9s %9s %9s %9s %9s %9s\n", "Model",
                "Class Acc", "F1 Macro", "Class 0", "Class 1", "Class 2", "Class 3", "Class 4",
                "All");
  out << line;
  out << std::string(std::char_traits<char>::length(line) - 1, '-') << '\n';
  bool oracle = false;
  for (const auto& r : table_order(rows)) {
    std::string name = variant_label(r.variant);
    if (r.oracle_routing) {
      name += "*";
      oracle = true;
    }
    std::snprintf(line, sizeof line, "%-10s %9s %9s %9s %9s %9s %9s %9s %9s\n", name.c_str(),
                  cell(r.accuracy, 4).c_str(), cell(r.f1_macro, 4).c_str(),
                  cell(r.class_mape[0], 2).c_str(), cell(r.class_mape[1], 2).c_str(),
                  cell(r.class_mape[2], 2).c_str(), cell(r.class_mape[3], 2).c_str(),
                  cell(r.class_mape[4], 2).c_str(), cell(r.mape_all, 2).c_str());
    out << line;
  }
  out << "MAPE in percent over the test mask; class columns group nets by predicted class.\n";
  if (oracle)
    out << "* oracle routing: regressors are selected by the ground-truth class.\n";
  return out.str();
}

nlohmann::json table_to_json(const std::vector<MetricsReport>& rows)
{
  nlohmann::json j = nlohmann::json::array();
  for (const auto& r : table_order(rows))
    j.push_back(r.to_json());
  return {{"rows", j},
          {"class_grouping", "predicted"},
          {"note", "the None row uses oracle routing by ground-truth class"}};
}

std::vector<MetricsReport> run_sweep(const LabeledDataset& ds, const SweepConfig& cfg,
                                     const ProgressCallback& progress)
{
  if (cfg.seeds.empty())
    throw UsageError("sweep needs at least one seed");
  std::vector<MetricsReport> rows;
  for (Variant v : cfg.variants) {
    std::vector<MetricsReport> runs;
    for (std::uint64_t seed : cfg.seeds) {
      ModelConfig mc = cfg.model;
      mc.variant = v;
      TrainConfig tc = cfg.train;
      tc.seed = seed;
      TwoStageModel model(mc, seed);
      model.train(ds, tc);
      runs.push_back(evaluate(model, ds));
      if (progress) {
        char buf[160];
        std::snprintf(buf, sizeof buf, "%s seed %llu: mape %.3f%%", variant_label(v),
                      static_cast<unsigned long long>(seed), runs.back().mape_all);
        progress(buf);
      }
    }
    rows.push_back(average(runs));
  }
  return table_order(rows);
}

double AblationCell::mean_f1() const { return mean(f1_macro); }
double AblationCell::mean_accuracy() const { return mean(accuracy); }

const AblationCell* AblationReport::find(Variant v, LossKind loss, bool subckt_nodes) const
{
  for (const auto& c : cells)
    if (c.variant == v && c.loss == loss && c.subckt_nodes == subckt_nodes)
      return &c;
  return nullptr;
}

nlohmann::json AblationReport::to_json() const
{
  nlohmann::json j = nlohmann::json::array();
  for (const auto& c : cells)
    j.push_back({{"variant", variant_name(c.variant)},
                 {"loss", loss_name(c.loss)},
                 {"subckt_nodes", c.subckt_nodes},
                 {"f1_macro", c.f1_macro},
                 {"accuracy", c.accuracy},
                 {"mean_f1_macro", c.mean_f1()},
                 {"mean_accuracy", c.mean_accuracy()}});
  return {{"seeds", seeds}, {"cells", j}};
}

std::string AblationReport::format() const
{
  std::ostringstream out;
  char line[256];
  std::snprintf(line, sizeof line, "%-10s %-14s %-5s %9s %9s\n", "Model", "Loss", "SUB",
                "F1 Macro", "Class Acc");
  out << line;
  out << std::string(std::char_traits<char>::length(line) - 1, '-') << '\n';
  for (const auto& c : cells) {
    std::snprintf(line, sizeof line, "%-10s %-14s %-5s %9.4f %9.4f\n", variant_label(c.variant),
                  loss_name(c.loss), c.subckt_nodes ? "yes" : "no", c.mean_f1(),
                  c.mean_accuracy());
    out << line;
  }
  out << "Test-mask classifier scores averaged over " << seeds.size() << " seed(s).\n";
  return out.str();
}

AblationReport run_ablation(const LabeledDataset& ds, const SweepConfig& cfg, bool sub_axis,
                            const ProgressCallback& progress)
{
  if (cfg.seeds.empty())
    throw UsageError("ablation needs at least one seed");
  AblationReport rep;
  rep.seeds = cfg.seeds;
  const LabeledDataset no_sub = sub_axis ? without_subckt_nodes(ds) : LabeledDataset{};
  std::vector<int> test_labels;
  for (int i : ds.masks.test)
    test_labels.push_back(ds.klass[i]);
  for (Variant v : cfg.variants) {
    if (v == Variant::None)
      continue;
    for (bool subs : sub_axis ? std::vector<bool>{true, false} : std::vector<bool>{true}) {
      const LabeledDataset& data = subs ? ds : no_sub;
      const NormalizationStats stats = compute_normalization(data.graph);
      const GraphInput in = make_input(data.graph, stats);
      for (LossKind loss : {LossKind::Focal, LossKind::CrossEntropy}) {
        AblationCell c;
        c.variant = v;
        c.loss = loss;
        c.subckt_nodes = subs;
        for (std::uint64_t seed : cfg.seeds) {
          ModelConfig mc = cfg.model;
          mc.variant = v;
          mc.subckt_nodes = subs;
          TrainConfig tc = cfg.train;
          tc.loss = loss;
          tc.seed = seed;
          nn::Rng rng(seed);
          Classifier clf(mc, rng.next());
          train_stage1(clf, in, data, tc);
          const Matrix probs = clf.probabilities(in);
          std::vector<int> pred;
          for (int i : data.masks.test) {
            Index k = 0;
            probs.row(i).maxCoeff(&k);
            pred.push_back(static_cast<int>(k));
          }
          const auto m = nn::classification_metrics(pred, test_labels, kNumClasses);
          c.f1_macro.push_back(m.f1_macro);
          c.accuracy.push_back(m.accuracy);
          if (progress) {
            char buf[160];
            std::snprintf(buf, sizeof buf, "%s %s sub=%s seed %llu: f1 %.4f acc %.4f",
                          variant_label(v), loss_name(loss), subs ? "yes" : "no",
                          static_cast<unsigned long long>(seed), m.f1_macro, m.accuracy);
            progress(buf);
          }
        }
        rep.cells.push_back(std::move(c));
      }
    }
  }
  return rep;
}

} // namespace paracap::model
