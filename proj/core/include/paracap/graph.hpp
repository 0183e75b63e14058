#pragma once

#include "paracap/common.hpp"
#include "paracap/flatten.hpp"
#include "paracap/netlist.hpp"

#include <nlohmann/json.hpp>

#include <array>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace paracap {

enum class NodeType { Net, Dev, Sub };

/// Column layout of the three feature matrices.
struct FeatureSchema {
  static constexpr std::size_t kNetWidth = 13;
  static constexpr std::size_t kDevWidth = 11;
  static constexpr std::size_t kSubWidth = 4;

  static constexpr std::array<const char*, kNetWidth> net_columns = {
      "N_mos", "N_g",   "N_sd",  "N_b",   "W_tot",     "L_tot",     "N_cap",
      "Lr_tot", "Nr_tot", "N_res", "W_tot_res", "L_tot_res", "N_port"};
  static constexpr std::array<const char*, kDevWidth> dev_columns = {
      "M_mos", "L", "W", "M_res", "L_res", "W_res", "M_cap", "Lr", "Nr", "N_p", "T"};
  static constexpr std::array<const char*, kSubWidth> sub_columns = {"N_port", "N_d", "N_n",
                                                                      "Lvl"};
};

namespace netcol {
enum : int { NMos, NGate, NSd, NBulk, WTot, LTot, NCap, LrTot, NrTot, NRes, WTotRes, LTotRes, NPort };
}
namespace devcol {
enum : int { MMos, L, W, MRes, LRes, WRes, MCap, Lr, Nr, NPins, Type };
}
namespace subcol {
enum : int { NPort, NDev, NNets, Level };
}

struct NetNode {
  std::string name; // canonical
  int owner_depth = 0;
};

struct DevNode {
  std::string path;
  DeviceKind kind = DeviceKind::Nmos;
};

struct SubNode {
  std::string path;
  int level = 1;
};

/// Heterogeneous net/device/subcircuit graph. Node ids are global:
/// nets occupy [0, |NET|), devices [|NET|, |NET|+|DEV|), subcircuits after.
/// Edges are undirected, stored once with u < v, sorted and unique.
struct HeteroGraph {
  std::vector<NetNode> nets;
  std::vector<DevNode> devs;
  std::vector<SubNode> subs;
  std::vector<std::pair<int, int>> edges;
  Matrix feat_net;
  Matrix feat_dev;
  Matrix feat_sub;

  std::size_t num_nodes() const { return nets.size() + devs.size() + subs.size(); }
  int dev_id(std::size_t i) const { return static_cast<int>(nets.size() + i); }
  int sub_id(std::size_t i) const { return static_cast<int>(nets.size() + devs.size() + i); }
  NodeType type_of(int id) const;
};

/// Builds the graph topology from the flattened design. Features are left
/// empty; call extract_features.
HeteroGraph build_graph(const Netlist& netlist, const NameOptions& options = {});
HeteroGraph build_graph(const FlatDesign& flat);

/// Fills feat_net / feat_dev / feat_sub (raw SI values, not normalised).
void extract_features(const FlatDesign& flat, HeteroGraph& graph);

/// build_graph + extract_features in one pass.
HeteroGraph featurize(const Netlist& netlist, const NameOptions& options = {});

/// Copy of `g` without subcircuit nodes and their edges.
HeteroGraph drop_subckt_nodes(const HeteroGraph& g);

struct NormalizationStats {
  RowVector net;
  RowVector dev;
  RowVector sub;
};

/// Per-column maximum; all-zero columns get 1.
NormalizationStats compute_normalization(const HeteroGraph& g);

struct FeatureSet {
  Matrix net;
  Matrix dev;
  Matrix sub;
};

/// Divides every column by its maximum. Computes the maxima when `stats` is
/// null, otherwise reuses them (values may then exceed 1).
std::pair<FeatureSet, NormalizationStats> normalize(const HeteroGraph& g,
                                                    const NormalizationStats* stats = nullptr);

struct GraphStats {
  std::size_t nets = 0;
  std::size_t devs = 0;
  std::size_t subs = 0;
  std::size_t nodes = 0;
  std::size_t edges = 0;
  std::map<std::size_t, std::size_t> net_degrees;
  std::map<std::size_t, std::size_t> dev_degrees;
  std::map<std::size_t, std::size_t> sub_degrees;
};

GraphStats graph_stats(const HeteroGraph& g);
nlohmann::json to_json(const GraphStats& s);

/// Lossless JSON container (schema_version 1).
nlohmann::json graph_to_json(const HeteroGraph& g);
HeteroGraph graph_from_json(const nlohmann::json& j);

nlohmann::json normalization_to_json(const NormalizationStats& s);
NormalizationStats normalization_from_json(const nlohmann::json& j);

} // namespace paracap
