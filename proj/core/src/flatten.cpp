#include "paracap/flatten.hpp"
#include "paracap/error.hpp"
#include "paracap/units.hpp"

#include <algorithm>
#include <numeric>

namespace paracap {

std::string canonical_name(std::string_view path, const NameOptions& options)
{
  std::string out;
  out.reserve(path.size());
  for (char c : path) {
    if (c == kPathSeparator && (out.empty() || out.back() == kPathSeparator))
      continue;
    out.push_back(c);
  }
  while (!out.empty() && out.back() == kPathSeparator)
    out.pop_back();
  return options.case_sensitive ? out : to_lower(out);
}

int FlatDesign::find_net(std::string_view name, const NameOptions& options) const
{
  const std::string key = canonical_name(name, options);
  if (auto it = net_index.find(key); it != net_index.end())
    return it->second;
  const std::string prefixed = canonical_name(top + std::string(1, kPathSeparator) + key, options);
  if (auto it = net_index.find(prefixed); it != net_index.end())
    return it->second;
  return -1;
}

namespace {

class Expander {
public:
  Expander(const Netlist& n, const NameOptions& o, FlatDesign& out)
      : netlist_(n), options_(o), out_(out)
  {
  }

  void run()
  {
    const SubcktDef& top = netlist_.top_def();
    out_.top = top.name;
    std::vector<int> binding(top.ports.size(), -2); // top ports are fresh nets
    expand(top, top.name, 0, binding, -1);
  }

private:
  std::string key(const std::string& local) const
  {
    return options_.case_sensitive ? local : to_lower(local);
  }

  void expand(const SubcktDef& def, const std::string& path, int depth,
              const std::vector<int>& binding, int self_sub)
  {
    std::unordered_map<std::string, int> local;
    for (std::size_t i = 0; i < def.ports.size(); ++i) {
      if (binding[i] != -2)
        local.emplace(key(def.ports[i]), binding[i]);
    }
    for (const std::string& net : def.nets()) {
      const std::string k = key(net);
      if (local.contains(k))
        continue;
      if (net == kGroundNet) {
        local.emplace(k, -1);
        continue;
      }
      FlatNet fn;
      fn.path = path + kPathSeparator + net;
      fn.canonical = canonical_name(fn.path, options_);
      fn.owner_depth = depth;
      fn.owner_path = path;
      fn.local_name = net;
      const int idx = static_cast<int>(out_.nets.size());
      out_.net_index.emplace(fn.canonical, idx);
      out_.nets.push_back(std::move(fn));
      local.emplace(k, idx);
    }

    std::vector<std::size_t> order(def.instances.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return def.instances[a].name < def.instances[b].name;
    });

    for (std::size_t i : order) {
      const Instance& inst = def.instances[i];
      std::vector<int> nets;
      nets.reserve(inst.terminals.size());
      for (const auto& t : inst.terminals)
        nets.push_back(local.at(key(t)));
      const std::string child_path = path + kPathSeparator + inst.name;
      if (is_primitive(inst.kind)) {
        out_.devices.push_back({child_path, &inst, std::move(nets), self_sub});
        continue;
      }
      const SubcktDef* master = netlist_.find(inst.master);
      if (!master)
        throw DataError("instance '" + child_path + "' references undefined subcircuit '" +
                        inst.master + "'");
      if (master->ports.size() != nets.size())
        throw DataError("instance '" + child_path + "' port count mismatch");
      const int sub_idx = static_cast<int>(out_.subs.size());
      out_.subs.push_back({child_path, &inst, master, nets, self_sub, depth + 1});
      expand(*master, child_path, depth + 1, nets, sub_idx);
    }
  }

  const Netlist& netlist_;
  const NameOptions& options_;
  FlatDesign& out_;
};

} // namespace

FlatDesign flatten(const Netlist& netlist, const NameOptions& options)
{
  FlatDesign out;
  if (netlist.subckts.empty())
    return out;
  Expander(netlist, options, out).run();
  return out;
}

std::vector<FlatNet> flatten_nets(const Netlist& netlist, const NameOptions& options)
{
  return flatten(netlist, options).nets;
}

} // namespace paracap
