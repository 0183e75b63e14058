#pragma once

#include "run_config.hpp"

#include <string>
#include <vector>

namespace paracap::cli {

struct GenArgs {
  std::string out;
};

struct ExtractArgs {
  std::vector<std::string> schematic;
  std::string spf;
  std::string out;
};

struct BuildGraphArgs {
  std::vector<std::string> schematic;
  std::string labels;
  std::string out;
};

struct TrainArgs {
  std::string dataset;
  std::string out;
  std::string report;
};

struct EvaluateArgs {
  std::string dataset;
  std::string model;
  std::string out;
  std::string variants;
  bool ablation = false;
};

struct AnnotateArgs {
  std::string model;
  std::vector<std::string> schematic;
  std::string out;
  std::string predictions;
};

void cmd_gen(const RunConfig& cfg, const GenArgs& a);
void cmd_extract_labels(const RunConfig& cfg, const ExtractArgs& a);
void cmd_build_graph(const RunConfig& cfg, const BuildGraphArgs& a);
void cmd_train(const RunConfig& cfg, const TrainArgs& a);
void cmd_evaluate(const RunConfig& cfg, const EvaluateArgs& a);
void cmd_annotate(const RunConfig& cfg, const AnnotateArgs& a);

} // namespace paracap::cli
