#include "paracap/flatten.hpp"
#include "paracap/error.hpp"
#include "paracap/units.hpp"

#include <cmath>
#include <unordered_set>

namespace paracap {

AnnotationResult back_annotate(const Netlist& netlist,
                               const std::vector<std::pair<std::string, double>>& caps,
                               const NameOptions& options)
{
  AnnotationResult result;
  result.netlist = netlist;
  if (caps.empty())
    return result;

  const FlatDesign flat = flatten(netlist, options);

  std::unordered_map<const SubcktDef*, int> instantiations;
  std::unordered_map<std::string, const SubcktDef*> def_at_path;
  for (const auto& s : flat.subs) {
    ++instantiations[s.def];
    def_at_path.emplace(s.path, s.def);
  }

  std::unordered_map<std::string, std::unordered_set<std::string>> taken;
  for (const auto& def : netlist.subckts) {
    auto& names = taken[to_lower(def.name)];
    for (const auto& inst : def.instances)
      names.insert(to_lower(inst.name));
  }

  std::unordered_set<int> done;
  int counter = 0;
  for (const auto& [name, farads] : caps) {
    const int idx = flat.find_net(name, options);
    if (idx < 0 || !done.insert(idx).second) {
      result.unmatched.push_back(name);
      continue;
    }
    if (!(farads > 0.0) || !std::isfinite(farads))
      throw NumericError("annotation value for '" + name + "' must be positive and finite");
    const FlatNet& net = flat.nets[static_cast<std::size_t>(idx)];

    std::string target_name = flat.top;
    std::string node = net.local_name;
    if (net.owner_depth > 0) {
      const SubcktDef* owner = def_at_path.at(net.owner_path);
      if (instantiations[owner] == 1) {
        target_name = owner->name;
      } else {
        // SPICE hierarchical reference from top: x1.x2.net
        node = net.path.substr(flat.top.size() + 1);
        for (char& c : node)
          if (c == kPathSeparator)
            c = '.';
      }
    }

    auto& names = taken[to_lower(target_name)];
    std::string card_name;
    do {
      card_name = "Cpara" + std::to_string(counter++);
    } while (names.contains(to_lower(card_name)));
    names.insert(to_lower(card_name));

    Instance cap;
    cap.name = card_name;
    cap.kind = DeviceKind::Cap;
    cap.terminals = {node, std::string(kGroundNet)};
    cap.params["value"] = farads;
    cap.params["m"] = 1.0;
    result.netlist.find(target_name)->instances.push_back(std::move(cap));
    ++result.added;
  }
  return result;
}

Netlist strip_annotations(const Netlist& annotated, const Netlist& original)
{
  Netlist out = annotated;
  for (auto& def : out.subckts) {
    std::unordered_set<std::string> keep;
    if (const SubcktDef* orig = original.find(def.name))
      for (const auto& inst : orig->instances)
        keep.insert(to_lower(inst.name));
    std::erase_if(def.instances, [&](const Instance& inst) {
      const std::string lower = to_lower(inst.name);
      return lower.starts_with("cpara") && !keep.contains(lower);
    });
  }
  return out;
}

} // namespace paracap
