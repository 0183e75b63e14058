#include "run_config.hpp"

#include "paracap/error.hpp"
#include "paracap/io.hpp"

namespace paracap::cli {

nlohmann::json RunConfig::to_json() const
{
  return {{"seed", seed},
          {"deterministic", deterministic},
          {"units", cap_unit_name(units)},
          {"synth", synth.to_json()},
          {"split", {{"train", split.train}, {"val", split.val}, {"test", split.test}}},
          {"model", model.to_json()},
          {"train", train.to_json()},
          {"sweep_seeds", sweep_seeds}};
}

RunConfig RunConfig::from_json(const nlohmann::json& j)
{
  if (!j.is_object())
    throw UsageError("run config must be a JSON object");
  RunConfig c;
  for (const auto& [key, value] : j.items()) {
    try {
      if (key == "seed") {
        c.seed = value.get<std::uint64_t>();
      } else if (key == "deterministic") {
        c.deterministic = value.get<bool>();
      } else if (key == "units") {
        c.units = cap_unit_from_name(value.get<std::string>());
      } else if (key == "synth") {
        c.synth = SynthConfig::from_json(value);
      } else if (key == "split") {
        if (!value.is_object())
          throw UsageError("split must be an object");
        for (const auto& [k, v] : value.items()) {
          if (k == "train")
            c.split.train = v.get<double>();
          else if (k == "val")
            c.split.val = v.get<double>();
          else if (k == "test")
            c.split.test = v.get<double>();
          else
            throw UsageError("unknown split key '" + k + "'");
        }
      } else if (key == "model") {
        c.model = model::ModelConfig::from_json(value);
      } else if (key == "train") {
        c.train = model::TrainConfig::from_json(value);
      } else if (key == "sweep_seeds") {
        c.sweep_seeds = value.get<std::vector<std::uint64_t>>();
      } else {
        throw UsageError("unknown config key '" + key + "'");
      }
    } catch (const nlohmann::json::exception&) {
      throw UsageError("bad value for config key '" + key + "'");
    }
  }
  return c;
}

RunConfig load_run_config(const std::string& path, const Overrides& o)
{
  RunConfig c = path.empty() ? RunConfig{} : RunConfig::from_json(read_json_file(path));
  if (o.seed) {
    c.seed = *o.seed;
    c.synth.seed = *o.seed;
  }
  c.train.seed = c.seed;
  if (o.variant)
    c.model.variant = model::variant_from_name(*o.variant);
  if (o.gamma) {
    if (!(*o.gamma >= 0.0))
      throw UsageError("--gamma must be non-negative");
    c.train.gamma = *o.gamma;
  }
  if (o.epochs) {
    if (*o.epochs < 1)
      throw UsageError("--epochs must be >= 1");
    c.train.epochs = *o.epochs;
  }
  if (o.units)
    c.units = cap_unit_from_name(*o.units);
  if (o.deterministic)
    c.deterministic = true;
  c.train.deterministic = c.deterministic;
  if (c.sweep_seeds.empty())
    c.sweep_seeds = {c.seed};
  return c;
}

} // namespace paracap::cli
