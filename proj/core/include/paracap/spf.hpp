#pragma once

#include "paracap/flatten.hpp"
#include "paracap/netlist.hpp"
#include "paracap/units.hpp"

#include <nlohmann/json.hpp>

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace paracap {

struct CapElement {
  std::string name;
  std::string node_a;
  std::string node_b;
  double farads = 0.0;
  /// Name of the other net for coupling capacitors; empty when grounded or
  /// when both ends lie on the same net.
  std::string coupled_net;
};

struct ParasiticNet {
  std::string name;
  std::optional<double> lumped_cap;
  std::vector<CapElement> elements;
  /// Pin and instance-pin node names declared by *|P / *|I / *|S lines.
  std::vector<std::string> pins;
};

struct SpfOptions {
  std::string source = "<spf>";
};

/// Parses the DSPF subset: `*|NET name cap` blocks, `*|P`, `*|I`, `*|S`
/// node declarations, `C` cards (`R` cards are skipped), `*|DIVIDER c`,
/// and optional .SUBCKT/.ENDS wrappers. Coupling capacitors are attached to
/// every net they touch. Net names are normalised to '/' separators.
std::vector<ParasiticNet> parse_spf(std::string_view text, const SpfOptions& options = {});

/// Writes nets back as DSPF: one *|NET block per net, its pins as *|I
/// lines, and every capacitor once (in the first block that lists it).
std::string emit_spf(const std::vector<ParasiticNet>& nets, const std::string& design = "design");

/// Same nets in the same order with equal totals and pins, and the same
/// capacitor elements per net irrespective of their order.
bool spf_structurally_equal(const std::vector<ParasiticNet>& a, const std::vector<ParasiticNet>& b);

struct CeffOptions {
  /// Weight applied to coupling capacitors (1 = full value to each net).
  double coupling_factor = 1.0;
};

/// Extractor annotation when present, otherwise the sum of incident
/// capacitor elements. Throws DataError for a net with neither.
double compute_ceff(const ParasiticNet& net, const CeffOptions& options = {});

/// Threshold below which labels are kept but flagged (0.01 fF).
inline constexpr double kBelowRangeFarads = 1e-17;

struct MatchStats {
  std::size_t matched = 0;
  std::size_t spf_unmatched = 0;
  std::size_t schematic_unmatched = 0;
  std::size_t nonpositive = 0;
  std::size_t below_range = 0;
  std::vector<std::string> spf_misses;
  std::vector<std::string> schematic_misses;

  double match_rate(std::size_t schematic_nets) const;
};

struct LabelTable {
  /// Canonical net name and C_eff in farads, in schematic net order.
  std::vector<std::pair<std::string, double>> entries;
  MatchStats stats;
  std::size_t schematic_nets = 0;

  std::optional<double> find(std::string_view canonical) const;
};

/// Matches SPF nets to schematic nets by canonical name. SPF names without
/// the top prefix are resolved relative to top.
LabelTable build_labels(const std::vector<ParasiticNet>& nets, const Netlist& schematic,
                        const NameOptions& names = {}, const CeffOptions& ceff = {});

/// `<canonical-net> <C_eff>` per line; '#' starts a comment. Values carry an
/// "f" suffix when written in femtofarads.
std::string write_label_table(const LabelTable& table, CapUnit unit = CapUnit::Farad);
LabelTable read_label_table(std::string_view text, const std::string& source = "<labels>");

/// Match statistics plus a per-decade histogram of C_eff (in fF).
nlohmann::json label_report(const LabelTable& table);

} // namespace paracap
