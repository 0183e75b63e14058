#include "commands.hpp"

#include "paracap/error.hpp"
#include "paracap/flatten.hpp"
#include "paracap/graph.hpp"
#include "paracap/io.hpp"
#include "paracap/model/evaluate.hpp"
#include "paracap/netlist.hpp"
#include "paracap/spf.hpp"
#include "paracap/synth.hpp"

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <sstream>

namespace paracap::cli {

namespace {

namespace fs = std::filesystem;

void log(const std::string& msg)
{
  std::cerr << msg << '\n';
}

std::string sibling(const std::string& path, const std::string& suffix)
{
  fs::path p(path);
  return (p.parent_path() / (p.stem().string() + suffix)).string();
}

void ensure_parent(const std::string& path)
{
  const fs::path parent = fs::path(path).parent_path();
  if (!parent.empty())
    fs::create_directories(parent);
}

std::vector<model::Variant> parse_variants(const std::string& spec)
{
  using model::Variant;
  if (spec == "all")
    return {Variant::None, Variant::Gat, Variant::Gcn, Variant::SageMean, Variant::SagePool};
  std::vector<Variant> out;
  std::stringstream ss(spec);
  std::string item;
  while (std::getline(ss, item, ','))
    out.push_back(model::variant_from_name(item));
  if (out.empty())
    throw UsageError("--variants needs 'all' or a comma-separated list");
  return out;
}

} // namespace

void cmd_gen(const RunConfig& cfg, const GenArgs& a)
{
  const SynthDesign design = generate_synthetic(cfg.synth);
  fs::create_directories(a.out);
  const std::string dir = a.out + "/";
  write_file_atomic(dir + "design.sp", emit_netlist(design.netlist));
  write_file_atomic(dir + "design.spf", write_oracle_spf(design.labels, design.netlist.top));
  write_file_atomic(dir + "labels.txt", write_label_table(design.labels, cfg.units));
  write_json_atomic(dir + "gen.json",
                    {{"config", cfg.to_json()},
                     {"counters",
                      {{"nets", design.counters.nets},
                       {"devices", design.counters.devices},
                       {"subckt_instances", design.counters.subckt_instances},
                       {"definitions", design.counters.definitions}}},
                     {"labels", label_report(design.labels)}});
  log("gen: " + std::to_string(design.counters.nets) + " nets, " +
      std::to_string(design.counters.devices) + " devices, " +
      std::to_string(design.counters.subckt_instances) + " subcircuit instances -> " + a.out);
}

void cmd_extract_labels(const RunConfig& cfg, const ExtractArgs& a)
{
  const Netlist netlist = parse_netlist_files(a.schematic);
  const auto nets = parse_spf(read_text_file(a.spf), {a.spf});
  const LabelTable table = build_labels(nets, netlist);
  ensure_parent(a.out);
  write_file_atomic(a.out, write_label_table(table, cfg.units));
  write_json_atomic(sibling(a.out, ".json"),
                    {{"config", cfg.to_json()}, {"report", label_report(table)}});
  log("extract-labels: " + std::to_string(table.entries.size()) + " of " +
      std::to_string(table.schematic_nets) + " nets labeled -> " + a.out);
}

void cmd_build_graph(const RunConfig& cfg, const BuildGraphArgs& a)
{
  const Netlist netlist = parse_netlist_files(a.schematic);
  HeteroGraph g = featurize(netlist);
  fs::create_directories(a.out);
  const std::string dir = a.out + "/";
  write_json_atomic(dir + "stats.json",
                    {{"config", cfg.to_json()}, {"stats", to_json(graph_stats(g))}});
  if (a.labels.empty()) {
    write_json_atomic(dir + "graph.json", graph_to_json(g));
    log("build-graph: " + std::to_string(g.num_nodes()) + " nodes, " +
        std::to_string(g.edges.size()) + " edges -> " + a.out);
    return;
  }
  const LabelTable labels = read_label_table(read_text_file(a.labels), a.labels);
  const LabeledDataset ds = make_dataset(std::move(g), labels, cfg.split, cfg.seed);
  save_dataset(ds, a.out, cfg.to_json());
  log("build-graph: " + std::to_string(ds.graph.num_nodes()) + " nodes, " +
      std::to_string(ds.graph.edges.size()) + " edges, split " +
      std::to_string(ds.masks.train.size()) + "/" + std::to_string(ds.masks.val.size()) + "/" +
      std::to_string(ds.masks.test.size()) + " -> " + a.out);
}

void cmd_train(const RunConfig& cfg, const TrainArgs& a)
{
  const LabeledDataset ds = load_dataset(a.dataset);
  model::TwoStageModel m(cfg.model, cfg.seed);
  const auto rep = m.train(ds, cfg.train, [](const model::EpochRecord& r) {
    if (r.epoch % 10 == 0) {
      char buf[160];
      std::snprintf(buf, sizeof buf, "epoch %d loss %.5f train acc %.4f val acc %.4f val f1 %.4f",
                    r.epoch, r.loss, r.train_accuracy, r.val_accuracy, r.val_f1_macro);
      log(buf);
    }
  });
  ensure_parent(a.out);
  write_json_atomic(a.out, m.to_json(cfg.to_json()));
  const std::string report = a.report.empty() ? sibling(a.out, ".report.json") : a.report;
  write_json_atomic(report, {{"config", cfg.to_json()}, {"training", rep.to_json()}});
  log("train: " + std::string(model::variant_name(cfg.model.variant)) + " -> " + a.out);
}

void cmd_evaluate(const RunConfig& cfg, const EvaluateArgs& a)
{
  const LabeledDataset ds = load_dataset(a.dataset);
  std::vector<model::MetricsReport> rows;
  nlohmann::json out = {{"config", cfg.to_json()}};
  std::string text;
  if (!a.variants.empty()) {
    model::SweepConfig sc;
    sc.variants = parse_variants(a.variants);
    sc.seeds = cfg.sweep_seeds;
    sc.model = cfg.model;
    sc.train = cfg.train;
    rows = model::run_sweep(ds, sc, log);
    if (a.ablation) {
      const auto abl = model::run_ablation(ds, sc, true, log);
      out["ablation"] = abl.to_json();
      text = abl.format();
    }
  } else {
    if (a.model.empty())
      throw UsageError("evaluate needs --model or --variants");
    auto m = model::TwoStageModel::from_json(read_json_file(a.model));
    rows.push_back(model::evaluate(m, ds));
    out["model_config"] = m.config().to_json();
  }
  out["table"] = model::table_to_json(rows);
  text = model::format_table(rows) + (text.empty() ? "" : "\n" + text);
  ensure_parent(a.out);
  write_json_atomic(a.out + ".json", out);
  write_file_atomic(a.out + ".txt", text);
  std::cout << text;
}

void cmd_annotate(const RunConfig& cfg, const AnnotateArgs& a)
{
  auto m = model::TwoStageModel::from_json(read_json_file(a.model));
  if (m.is_baseline())
    throw UsageError("annotate needs a GNN model; the none baseline routes by ground truth");
  const Netlist netlist = parse_netlist_files(a.schematic);
  const HeteroGraph g = featurize(netlist);
  const model::Prediction p = m.predict(g);
  std::vector<std::pair<std::string, double>> caps;
  caps.reserve(g.nets.size());
  for (std::size_t i = 0; i < g.nets.size(); ++i)
    caps.emplace_back(g.nets[i].name, p.ceff_ff[i] * kFemto);
  const AnnotationResult res = back_annotate(netlist, caps);
  if (!res.unmatched.empty())
    throw DataError("annotation could not place net '" + res.unmatched.front() + "'");
  ensure_parent(a.out);
  write_file_atomic(a.out, emit_netlist(res.netlist));
  LabelTable pred;
  pred.entries = std::move(caps);
  write_file_atomic(a.predictions.empty() ? sibling(a.out, ".pred.txt") : a.predictions,
                    write_label_table(pred, cfg.units));
  log("annotate: " + std::to_string(res.added) + " Cpara cards -> " + a.out);
}

} // namespace paracap::cli
