#pragma once

#include "paracap/dataset.hpp"
#include "paracap/model/two_stage.hpp"
#include "paracap/synth.hpp"
#include "paracap/units.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace paracap::cli {

/// Effective settings of one command: defaults, then the --config file, then
/// flag overrides.
struct RunConfig {
  std::uint64_t seed = 0;
  bool deterministic = false;
  CapUnit units = CapUnit::Farad;
  SynthConfig synth;
  SplitRatios split;
  model::ModelConfig model;
  model::TrainConfig train;
  /// Seeds of the variant sweep and ablation; empty means {seed}.
  std::vector<std::uint64_t> sweep_seeds;

  nlohmann::json to_json() const;
  static RunConfig from_json(const nlohmann::json& j);
};

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::string> variant;
  std::optional<double> gamma;
  std::optional<int> epochs;
  std::optional<std::string> units;
  bool deterministic = false;
};

/// Loads `path` (may be empty) and applies the overrides. A seed override
/// reseeds the generator, the split, initialisation and training.
RunConfig load_run_config(const std::string& path, const Overrides& o);

} // namespace paracap::cli
