#pragma once

#include "paracap/netlist.hpp"

#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace paracap {

/// Hierarchy separator used in flattened names.
inline constexpr char kPathSeparator = '/';

/// The SPICE reference node. It is not a net of the design and never becomes
/// a graph node.
inline constexpr std::string_view kGroundNet = "0";

struct NameOptions {
  bool case_sensitive = false;
};

/// Canonical form of a hierarchical name: separators normalised to '/',
/// repeated separators collapsed, lower-cased unless case-sensitive.
/// canonical_name(canonical_name(x)) == canonical_name(x).
std::string canonical_name(std::string_view path, const NameOptions& options = {});

struct FlatNet {
  /// Topmost occurrence: "<top>/<inst>/.../<net>".
  std::string path;
  std::string canonical;
  /// Hierarchy depth of the level that owns the net (top = 0).
  int owner_depth = 0;
  /// Path of the owning instance ("" for top) and the local name there.
  std::string owner_path;
  std::string local_name;
};

struct FlatDevice {
  std::string path;
  const Instance* inst = nullptr;
  /// Flat net index per terminal; -1 for the ground node.
  std::vector<int> terminal_nets;
  /// Index into FlatDesign::subs of the enclosing instance, -1 for top.
  int parent_sub = -1;
};

struct FlatSub {
  std::string path;
  const Instance* inst = nullptr;
  const SubcktDef* def = nullptr;
  /// Flat net index per master port; -1 for the ground node.
  std::vector<int> port_nets;
  int parent_sub = -1;
  /// 1 for instances placed directly in top.
  int level = 1;
};

/// Fully expanded design. Pointers refer into the source Netlist, which must
/// outlive this object.
struct FlatDesign {
  std::string top;
  std::vector<FlatNet> nets;
  std::vector<FlatDevice> devices;
  std::vector<FlatSub> subs;
  std::unordered_map<std::string, int> net_index; // canonical -> index

  int find_net(std::string_view name, const NameOptions& options = {}) const;
};

/// Expands the hierarchy depth-first; child instances are visited in
/// instance-name order so the result does not depend on definition order.
/// Nets bound to ports merge into the parent's net.
FlatDesign flatten(const Netlist& netlist, const NameOptions& options = {});

std::vector<FlatNet> flatten_nets(const Netlist& netlist, const NameOptions& options = {});

struct AnnotationResult {
  Netlist netlist;
  std::size_t added = 0;
  std::vector<std::string> unmatched;
};

/// Adds one grounded capacitor `Cpara<i> <net> 0 <farads>` per matched entry.
/// The card lands in the definition that owns the net when that definition
/// is instantiated once in the design (always true for top); otherwise it is
/// placed in top with a SPICE hierarchical reference "x1.x2.net".
/// Unmatched names are reported and skipped.
AnnotationResult back_annotate(const Netlist& netlist,
                               const std::vector<std::pair<std::string, double>>& caps,
                               const NameOptions& options = {});

/// Inverse of back_annotate for verification: drops every Cpara card whose
/// name is not present in `original`.
Netlist strip_annotations(const Netlist& annotated, const Netlist& original);

} // namespace paracap
