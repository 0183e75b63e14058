#pragma once

#include "paracap/netlist.hpp"
#include "paracap/spf.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <string>

namespace paracap {

/// Knobs of the synthetic SRAM-like generator. Sizes are in micrometres,
/// capacitance constants in femtofarads.
struct SynthConfig {
  int rows = 64;
  int cols = 64;
  /// Independent banks; bank b sits under b extra wrapper levels.
  int banks = 2;
  /// Column-mux ratio (columns per sense amplifier).
  int mux = 4;
  /// Arrays taller than this are split into segments with local bitlines.
  int segment_rows = 16;
  std::uint64_t seed = 0;
  double noise_sigma = 0.05;

  double k_gate = 10.0;  // fF / um^2
  double k_sd = 0.5;     // fF / um
  double k_wire = 0.2;   // fF
  double fanout_exp = 1.1;
  /// Wire factor of a net owned at depth d: lvl_top * lvl_decay^d.
  double lvl_top = 9.14;
  double lvl_decay = 0.35;
  /// MOM capacitor density, fF per (um of finger length x finger).
  double c_unit = 0.05;

  nlohmann::json to_json() const;
  static SynthConfig from_json(const nlohmann::json& j);
};

/// Element counts tallied while the design is built, independently of the
/// flattener.
struct SynthCounters {
  std::size_t nets = 0;
  std::size_t devices = 0;
  std::size_t subckt_instances = 0;
  std::size_t definitions = 0;
};

struct SynthDesign {
  Netlist netlist;
  /// Oracle C_eff per flattened net, in flattened order.
  LabelTable labels;
  SynthCounters counters;
};

/// Hierarchical SRAM-like design: 6T cells in a rows x cols array per bank,
/// row decoders and wordline drivers, precharge, column mux, sense amps,
/// write drivers and a timing block. Labels come from a closed-form oracle
/// over gate area, source/drain width, fanout, hierarchy depth and explicit
/// capacitors, times lognormal noise. Deterministic in the config.
SynthDesign generate_synthetic(const SynthConfig& cfg);

/// DSPF text whose per-net totals equal the given label table.
std::string write_oracle_spf(const LabelTable& labels, const std::string& design);

} // namespace paracap
