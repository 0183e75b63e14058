#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace paracap {

enum class DeviceKind { Nmos, Pmos, Res, Cap, Diode, Subckt };

const char* device_kind_name(DeviceKind kind);
std::optional<DeviceKind> device_kind_from_name(std::string_view name);

/// Stable type code used as the T column of device features.
int device_type_code(DeviceKind kind);

bool is_primitive(DeviceKind kind);

/// A device card or a subcircuit instance inside a SubcktDef.
struct Instance {
  std::string name;
  DeviceKind kind = DeviceKind::Nmos;
  /// Subcircuit name for SUBCKT instances, device model name otherwise
  /// (may be empty for plain R/C cards).
  std::string master;
  std::vector<std::string> terminals;
  /// Lower-case parameter names mapped to SI values. Positional R/C values
  /// are stored under "value".
  std::map<std::string, double> params;

  double param(std::string_view key, double fallback = 0.0) const;

  bool operator==(const Instance&) const = default;
};

struct SubcktDef {
  std::string name;
  std::vector<std::string> ports;
  std::vector<Instance> instances;

  /// Ports first, then every other terminal net in order of first use.
  /// Derived from ports and instances; nothing else is stored.
  std::vector<std::string> nets() const;
  /// Number of primitive (non-SUBCKT) instances.
  std::size_t device_count() const;

  bool operator==(const SubcktDef&) const = default;
};

/// Hierarchical schematic. Immutable after parsing; safe to share for reads.
struct Netlist {
  std::vector<SubcktDef> subckts;
  std::string top;
  /// True when `top` collects cards written outside any .SUBCKT block.
  bool implicit_top = false;
  std::vector<std::string> source_files;

  const SubcktDef* find(std::string_view name) const;
  SubcktDef* find(std::string_view name);
  const SubcktDef& top_def() const;

  /// Structural equality: definitions, instances and top; ignores sources.
  bool structurally_equal(const Netlist& other) const;
};

struct ParseOptions {
  /// Source label used in error messages.
  std::string source = "<input>";
  /// Forces the top-level subcircuit instead of inferring it.
  std::string top;
};

/// Parses the supported SPICE/CDL subset:
///   .SUBCKT name ports... / .ENDS [name] / .END
///   M d g s b model [k=v...]     MOS, 4 terminals
///   R a b [c] [model] [value] [k=v...]
///   C a b [c] [model] [value] [k=v...]
///   D a c [b] model [area] [k=v...]
///   X nets... [/] master [k=v...]
/// '+' continues the previous card; '*' starts a comment line and '$' an
/// inline comment. Keywords and subcircuit names are case-insensitive.
/// Cards outside any .SUBCKT form an implicit top named "top".
/// Throws ParseError on syntax errors, unknown device prefixes, arity
/// mismatches, unresolved masters and recursive definitions.
Netlist parse_netlist(std::string_view text, const ParseOptions& options = {});

/// Parses several files as one design (subcircuits may span files).
Netlist parse_netlist_files(const std::vector<std::string>& paths,
                            const std::string& top = {});

/// Writes the netlist in the same dialect; numbers use the shortest
/// round-trip scientific form.
std::string emit_netlist(const Netlist& netlist);

/// Chooses the top of a set of definitions: the unique root, or among several
/// roots the one with the largest expanded instance count (ties by name).
std::string infer_top(const std::vector<SubcktDef>& subckts);

} // namespace paracap
