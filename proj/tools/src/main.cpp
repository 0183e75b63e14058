#include "commands.hpp"

#include "paracap/error.hpp"

#include <CLI11.hpp>

#include <malloc.h>

#include <iostream>

using namespace paracap;
using namespace paracap::cli;

namespace {

int fail(ErrorCode code, const std::string& msg)
{
  std::string line = msg;
  for (char& c : line)
    if (c == '\n' || c == '\r')
      c = ' ';
  std::cerr << "error " << error_code_name(code) << ": " << line << '\n';
  return static_cast<int>(code);
}

} // namespace

int main(int argc, char** argv)
{
  // Full-graph activations are tens of MB; keep them on the heap so freed
  // pages are reused instead of being mapped and zeroed on every allocation.
  mallopt(M_MMAP_MAX, 0);
  mallopt(M_TRIM_THRESHOLD, 1 << 30);

  CLI::App app{"paracap: pre-layout net capacitance prediction"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  std::uint64_t seed = 0;
  std::string variant;
  double gamma = 0.0;
  int epochs = 0;
  std::string units;
  bool deterministic = false;
  auto* seed_opt = app.add_option("--seed", seed, "Seed for generation, split, init and training");
  app.add_option("--config", config_path, "JSON run configuration")->check(CLI::ExistingFile);
  auto* variant_opt = app.add_option("--variant", variant, "GNN variant")
                          ->check(CLI::IsMember({"gcn", "gat", "sage_mean", "sage_pool", "none"}));
  auto* gamma_opt = app.add_option("--gamma", gamma, "Focal-loss focusing parameter");
  auto* epochs_opt = app.add_option("--epochs", epochs, "Maximum stage-1 epochs");
  auto* units_opt =
      app.add_option("--units", units, "Capacitance units of label and prediction tables")
          ->check(CLI::IsMember({"f", "ff"}));
  app.add_flag("--deterministic", deterministic, "Train regressor groups sequentially");

  GenArgs gen;
  auto* c_gen = app.add_subcommand("gen", "Generate the synthetic SRAM design with oracle labels");
  c_gen->add_option("--out", gen.out, "Output directory")->required();

  ExtractArgs ext;
  auto* c_ext = app.add_subcommand("extract-labels", "Match SPF net capacitances to a schematic");
  c_ext->add_option("--schematic", ext.schematic, "Schematic netlist file(s)")->required()->check(CLI::ExistingFile);
  c_ext->add_option("--spf", ext.spf, "DSPF file")->required()->check(CLI::ExistingFile);
  c_ext->add_option("--out", ext.out, "Label table")->required();

  BuildGraphArgs bg;
  auto* c_bg = app.add_subcommand("build-graph", "Build the featurised graph (and dataset with --labels)");
  c_bg->add_option("--schematic", bg.schematic, "Schematic netlist file(s)")->required()->check(CLI::ExistingFile);
  c_bg->add_option("--labels", bg.labels, "Label table")->check(CLI::ExistingFile);
  c_bg->add_option("--out", bg.out, "Output directory")->required();

  TrainArgs tr;
  auto* c_tr = app.add_subcommand("train", "Train the two-stage model");
  c_tr->add_option("--dataset", tr.dataset, "Dataset directory")->required()->check(CLI::ExistingDirectory);
  c_tr->add_option("--out", tr.out, "Model checkpoint")->required();
  c_tr->add_option("--report", tr.report, "Training report (default <out>.report.json)");

  EvaluateArgs ev;
  auto* c_ev = app.add_subcommand("evaluate", "Score a model, or sweep variants, on the test mask");
  c_ev->add_option("--dataset", ev.dataset, "Dataset directory")->required()->check(CLI::ExistingDirectory);
  c_ev->add_option("--model", ev.model, "Model checkpoint")->check(CLI::ExistingFile);
  c_ev->add_option("--out", ev.out, "Output prefix for .json and .txt")->required();
  c_ev->add_option("--variants", ev.variants, "'all' or a comma-separated list to train and compare");
  c_ev->add_flag("--ablation", ev.ablation, "With --variants: focal vs cross-entropy, with/without SUB nodes");

  AnnotateArgs an;
  auto* c_an = app.add_subcommand("annotate", "Back-annotate predicted capacitances into a netlist");
  c_an->add_option("--model", an.model, "Model checkpoint")->required()->check(CLI::ExistingFile);
  c_an->add_option("--schematic", an.schematic, "Schematic netlist file(s)")->required()->check(CLI::ExistingFile);
  c_an->add_option("--out", an.out, "Annotated netlist")->required();
  c_an->add_option("--predictions", an.predictions, "Prediction table (default <out>.pred.txt)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail(ErrorCode::Usage, e.what());
  }

  try {
    Overrides o;
    if (*seed_opt)
      o.seed = seed;
    if (*variant_opt)
      o.variant = variant;
    if (*gamma_opt)
      o.gamma = gamma;
    if (*epochs_opt)
      o.epochs = epochs;
    if (*units_opt)
      o.units = units;
    o.deterministic = deterministic;
    const RunConfig cfg = load_run_config(config_path, o);

    if (*c_gen)
      cmd_gen(cfg, gen);
    else if (*c_ext)
      cmd_extract_labels(cfg, ext);
    else if (*c_bg)
      cmd_build_graph(cfg, bg);
    else if (*c_tr)
      cmd_train(cfg, tr);
    else if (*c_ev)
      cmd_evaluate(cfg, ev);
    else if (*c_an)
      cmd_annotate(cfg, an);
  } catch (const Error& e) {
    return fail(e.code(), e.what());
  } catch (const std::exception& e) {
    return fail(ErrorCode::DataMismatch, e.what());
  }
  return 0;
}
