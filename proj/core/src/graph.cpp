#include "paracap/graph.hpp"
#include "paracap/error.hpp"

#include <algorithm>
#include <cmath>

namespace paracap {

NodeType HeteroGraph::type_of(int id) const
{
  const auto u = static_cast<std::size_t>(id);
  if (u < nets.size())
    return NodeType::Net;
  if (u < nets.size() + devs.size())
    return NodeType::Dev;
  return NodeType::Sub;
}

namespace {

void sort_unique(std::vector<std::pair<int, int>>& edges)
{
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
}

std::vector<int> distinct_nets(const std::vector<int>& nets)
{
  std::vector<int> out;
  for (int n : nets)
    if (n >= 0 && std::find(out.begin(), out.end(), n) == out.end())
      out.push_back(n);
  return out;
}

double checked(const Instance& inst, const char* key, double fallback, const std::string& path)
{
  const double v = inst.param(key, fallback);
  if (!(v >= 0.0) || !std::isfinite(v))
    throw DataError("device '" + path + "' has invalid parameter " + key);
  return v;
}

} // namespace

HeteroGraph build_graph(const FlatDesign& flat)
{
  HeteroGraph g;
  g.nets.reserve(flat.nets.size());
  for (const auto& n : flat.nets)
    g.nets.push_back({n.canonical, n.owner_depth});
  g.devs.reserve(flat.devices.size());
  for (const auto& d : flat.devices)
    g.devs.push_back({d.path, d.inst->kind});
  g.subs.reserve(flat.subs.size());
  for (const auto& s : flat.subs)
    g.subs.push_back({s.path, s.level});

  const int num_nets = static_cast<int>(flat.nets.size());
  for (std::size_t i = 0; i < flat.devices.size(); ++i) {
    const int dev = g.dev_id(i);
    for (int n : distinct_nets(flat.devices[i].terminal_nets)) {
      if (n >= num_nets)
        throw DataError("device '" + flat.devices[i].path + "' has a dangling terminal");
      g.edges.emplace_back(n, dev);
    }
  }
  for (std::size_t i = 0; i < flat.subs.size(); ++i) {
    const int sub = g.sub_id(i);
    for (int n : distinct_nets(flat.subs[i].port_nets))
      g.edges.emplace_back(n, sub);
    if (flat.subs[i].parent_sub >= 0)
      g.edges.emplace_back(g.sub_id(static_cast<std::size_t>(flat.subs[i].parent_sub)), sub);
  }
  sort_unique(g.edges);
  return g;
}

HeteroGraph build_graph(const Netlist& netlist, const NameOptions& options)
{
  return build_graph(flatten(netlist, options));
}

void extract_features(const FlatDesign& flat, HeteroGraph& g)
{
  g.feat_net = Matrix::Zero(static_cast<Index>(flat.nets.size()), FeatureSchema::kNetWidth);
  g.feat_dev = Matrix::Zero(static_cast<Index>(flat.devices.size()), FeatureSchema::kDevWidth);
  g.feat_sub = Matrix::Zero(static_cast<Index>(flat.subs.size()), FeatureSchema::kSubWidth);

  for (std::size_t i = 0; i < flat.devices.size(); ++i) {
    const FlatDevice& d = flat.devices[i];
    const Instance& inst = *d.inst;
    const auto row = static_cast<Index>(i);
    const double m = checked(inst, "m", 1.0, d.path);
    const double w = checked(inst, "w", 0.0, d.path);
    const double l = checked(inst, "l", 0.0, d.path);
    auto dev = g.feat_dev.row(row);
    dev(devcol::NPins) = static_cast<double>(inst.terminals.size());
    dev(devcol::Type) = device_type_code(inst.kind);

    switch (inst.kind) {
    case DeviceKind::Nmos:
    case DeviceKind::Pmos: {
      dev(devcol::MMos) = m;
      dev(devcol::L) = l;
      dev(devcol::W) = w;
      for (std::size_t t = 0; t < d.terminal_nets.size(); ++t) {
        const int n = d.terminal_nets[t];
        if (n < 0)
          continue;
        auto net = g.feat_net.row(n);
        if (t == 1)
          net(netcol::NGate) += 1;
        else if (t == 3)
          net(netcol::NBulk) += 1;
        else
          net(netcol::NSd) += 1;
        net(netcol::WTot) += w * m;
        net(netcol::LTot) += l * m;
      }
      for (int n : distinct_nets(d.terminal_nets))
        g.feat_net(n, netcol::NMos) += 1;
      break;
    }
    case DeviceKind::Res: {
      dev(devcol::MRes) = m;
      dev(devcol::LRes) = l;
      dev(devcol::WRes) = w;
      for (int n : d.terminal_nets) {
        if (n < 0)
          continue;
        g.feat_net(n, netcol::WTotRes) += w * m;
        g.feat_net(n, netcol::LTotRes) += l * m;
      }
      for (int n : distinct_nets(d.terminal_nets))
        g.feat_net(n, netcol::NRes) += 1;
      break;
    }
    case DeviceKind::Cap: {
      const double lr = checked(inst, "lr", 0.0, d.path);
      const double nr = checked(inst, "nr", 0.0, d.path);
      dev(devcol::MCap) = m;
      dev(devcol::Lr) = lr;
      dev(devcol::Nr) = nr;
      for (int n : d.terminal_nets) {
        if (n < 0)
          continue;
        g.feat_net(n, netcol::LrTot) += lr * m;
        g.feat_net(n, netcol::NrTot) += nr * m;
      }
      for (int n : distinct_nets(d.terminal_nets))
        g.feat_net(n, netcol::NCap) += 1;
      break;
    }
    case DeviceKind::Diode:
    case DeviceKind::Subckt:
      break;
    }
  }

  for (std::size_t i = 0; i < flat.subs.size(); ++i) {
    const FlatSub& s = flat.subs[i];
    auto sub = g.feat_sub.row(static_cast<Index>(i));
    sub(subcol::NPort) = static_cast<double>(s.def->ports.size());
    sub(subcol::NDev) = static_cast<double>(s.def->device_count());
    const auto nets = s.def->nets();
    sub(subcol::NNets) =
        static_cast<double>(std::count_if(nets.begin(), nets.end(), [](const std::string& n) {
          return n != kGroundNet;
        }));
    sub(subcol::Level) = s.level;
    for (int n : s.port_nets)
      if (n >= 0)
        g.feat_net(n, netcol::NPort) += 1;
  }
}

HeteroGraph featurize(const Netlist& netlist, const NameOptions& options)
{
  const FlatDesign flat = flatten(netlist, options);
  HeteroGraph g = build_graph(flat);
  extract_features(flat, g);
  return g;
}

HeteroGraph drop_subckt_nodes(const HeteroGraph& g)
{
  HeteroGraph out;
  out.nets = g.nets;
  out.devs = g.devs;
  out.feat_net = g.feat_net;
  out.feat_dev = g.feat_dev;
  out.feat_sub = Matrix::Zero(0, FeatureSchema::kSubWidth);
  const int limit = static_cast<int>(g.nets.size() + g.devs.size());
  for (const auto& e : g.edges)
    if (e.first < limit && e.second < limit)
      out.edges.push_back(e);
  return out;
}

namespace {

RowVector column_max(const Matrix& m, Index cols)
{
  RowVector out = RowVector::Ones(cols);
  if (m.rows() == 0)
    return out;
  for (Index c = 0; c < cols; ++c) {
    const double mx = m.col(c).maxCoeff();
    out(c) = mx > 0.0 ? mx : 1.0;
  }
  return out;
}

Matrix scale(const Matrix& m, const RowVector& max)
{
  Matrix out = m;
  for (Index r = 0; r < out.rows(); ++r)
    out.row(r).array() /= max.array();
  return out;
}

} // namespace

NormalizationStats compute_normalization(const HeteroGraph& g)
{
  return {column_max(g.feat_net, FeatureSchema::kNetWidth),
          column_max(g.feat_dev, FeatureSchema::kDevWidth),
          column_max(g.feat_sub, FeatureSchema::kSubWidth)};
}

std::pair<FeatureSet, NormalizationStats> normalize(const HeteroGraph& g,
                                                    const NormalizationStats* stats)
{
  NormalizationStats s = stats ? *stats : compute_normalization(g);
  FeatureSet f{scale(g.feat_net, s.net), scale(g.feat_dev, s.dev), scale(g.feat_sub, s.sub)};
  return {std::move(f), std::move(s)};
}

GraphStats graph_stats(const HeteroGraph& g)
{
  GraphStats s;
  s.nets = g.nets.size();
  s.devs = g.devs.size();
  s.subs = g.subs.size();
  s.nodes = s.nets + s.devs + s.subs;
  s.edges = g.edges.size();
  std::vector<std::size_t> degree(s.nodes, 0);
  for (const auto& [u, v] : g.edges) {
    ++degree[static_cast<std::size_t>(u)];
    ++degree[static_cast<std::size_t>(v)];
  }
  for (std::size_t i = 0; i < s.nodes; ++i) {
    switch (g.type_of(static_cast<int>(i))) {
    case NodeType::Net: ++s.net_degrees[degree[i]]; break;
    case NodeType::Dev: ++s.dev_degrees[degree[i]]; break;
    case NodeType::Sub: ++s.sub_degrees[degree[i]]; break;
    }
  }
  return s;
}

nlohmann::json to_json(const GraphStats& s)
{
  auto hist = [](const std::map<std::size_t, std::size_t>& h) {
    nlohmann::json a = nlohmann::json::array();
    for (const auto& [deg, n] : h)
      a.push_back({deg, n});
    return a;
  };
  return {{"nets", s.nets},
          {"devices", s.devs},
          {"subcircuits", s.subs},
          {"nodes", s.nodes},
          {"edges", s.edges},
          {"degree_histogram",
           {{"net", hist(s.net_degrees)}, {"dev", hist(s.dev_degrees)}, {"sub", hist(s.sub_degrees)}}}};
}

} // namespace paracap
