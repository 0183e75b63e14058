#include "paracap/synth.hpp"
#include "paracap/error.hpp"
#include "paracap/flatten.hpp"
#include "paracap/units.hpp"

#include <cmath>
#include <functional>
#include <numbers>
#include <random>
#include <set>
#include <sstream>
#include <unordered_map>

namespace paracap {

nlohmann::json SynthConfig::to_json() const
{
  return {{"rows", rows},           {"cols", cols},         {"banks", banks},
          {"mux", mux},             {"seed", seed},         {"noise_sigma", noise_sigma},
          {"k_gate", k_gate},       {"k_sd", k_sd},         {"k_wire", k_wire},
          {"fanout_exp", fanout_exp}, {"lvl_top", lvl_top}, {"lvl_decay", lvl_decay},
          {"c_unit", c_unit}, {"segment_rows", segment_rows}};
}

SynthConfig SynthConfig::from_json(const nlohmann::json& j)
{
  SynthConfig c;
  const std::unordered_map<std::string, std::function<void(const nlohmann::json&)>> setters = {
      {"rows", [&](const auto& v) { c.rows = v.template get<int>(); }},
      {"cols", [&](const auto& v) { c.cols = v.template get<int>(); }},
      {"banks", [&](const auto& v) { c.banks = v.template get<int>(); }},
      {"mux", [&](const auto& v) { c.mux = v.template get<int>(); }},
      {"seed", [&](const auto& v) { c.seed = v.template get<std::uint64_t>(); }},
      {"noise_sigma", [&](const auto& v) { c.noise_sigma = v.template get<double>(); }},
      {"k_gate", [&](const auto& v) { c.k_gate = v.template get<double>(); }},
      {"k_sd", [&](const auto& v) { c.k_sd = v.template get<double>(); }},
      {"k_wire", [&](const auto& v) { c.k_wire = v.template get<double>(); }},
      {"fanout_exp", [&](const auto& v) { c.fanout_exp = v.template get<double>(); }},
      {"lvl_top", [&](const auto& v) { c.lvl_top = v.template get<double>(); }},
      {"lvl_decay", [&](const auto& v) { c.lvl_decay = v.template get<double>(); }},
      {"c_unit", [&](const auto& v) { c.c_unit = v.template get<double>(); }},
      {"segment_rows", [&](const auto& v) { c.segment_rows = v.template get<int>(); }},
  };
  if (!j.is_object())
    throw UsageError("synthetic config must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    auto it = setters.find(key);
    if (it == setters.end())
      throw UsageError("unknown synthetic config key '" + key + "'");
    try {
      it->second(value);
    } catch (const nlohmann::json::exception&) {
      throw UsageError("bad value for synthetic config key '" + key + "'");
    }
  }
  return c;
}

namespace {

constexpr double kUm = 1e-6;
constexpr double kLmin = 0.03;

std::string idx(const std::string& base, int i) { return base + std::to_string(i); }

std::vector<std::string> bus(const std::string& base, int n, int from = 0)
{
  std::vector<std::string> out;
  for (int i = 0; i < n; ++i)
    out.push_back(idx(base, from + i));
  return out;
}

std::vector<std::string> cat(std::initializer_list<std::vector<std::string>> parts)
{
  std::vector<std::string> out;
  for (const auto& p : parts)
    out.insert(out.end(), p.begin(), p.end());
  return out;
}

int ceil_log2(int n)
{
  int b = 0;
  while ((1 << b) < n)
    ++b;
  return b;
}

class Builder {
public:
  explicit Builder(const SynthConfig& cfg) : cfg_(cfg) {}

  Netlist netlist;

  bool has(const std::string& name) const { return netlist.find(name) != nullptr; }

  SubcktDef& open(const std::string& name, std::vector<std::string> ports)
  {
    cur_ = SubcktDef{name, std::move(ports), {}};
    return cur_;
  }
  void close() { netlist.subckts.push_back(std::move(cur_)); }

  void mos(DeviceKind kind, const std::string& name, const std::string& d, const std::string& g,
           const std::string& s, const std::string& b, const std::string& model, double w_um,
           double l_um = kLmin)
  {
    Instance m;
    m.name = "M" + name;
    m.kind = kind;
    m.master = model;
    m.terminals = {d, g, s, b};
    m.params = {{"w", w_um * kUm}, {"l", l_um * kUm}, {"m", 1.0}};
    cur_.instances.push_back(std::move(m));
  }
  void nmos(const std::string& name, const std::string& d, const std::string& g,
            const std::string& s, double w_um, const std::string& model = "nch")
  {
    mos(DeviceKind::Nmos, name, d, g, s, "vss", model, w_um);
  }
  void pmos(const std::string& name, const std::string& d, const std::string& g,
            const std::string& s, double w_um, const std::string& model = "pch")
  {
    mos(DeviceKind::Pmos, name, d, g, s, "vdd", model, w_um);
  }
  void x(const std::string& name, const std::string& master, std::vector<std::string> nets)
  {
    Instance i;
    i.name = "X" + name;
    i.kind = DeviceKind::Subckt;
    i.master = master;
    i.terminals = std::move(nets);
    cur_.instances.push_back(std::move(i));
  }
  void res(const std::string& name, const std::string& a, const std::string& b, double w_um,
           double l_um)
  {
    Instance r;
    r.name = "R" + name;
    r.kind = DeviceKind::Res;
    r.master = "rppoly";
    r.terminals = {a, b};
    r.params = {{"w", w_um * kUm}, {"l", l_um * kUm}, {"m", 1.0}};
    cur_.instances.push_back(std::move(r));
  }
  void cap(const std::string& name, const std::string& a, const std::string& b, double lr_um,
           double nr)
  {
    Instance c;
    c.name = "C" + name;
    c.kind = DeviceKind::Cap;
    c.master = "mom";
    c.terminals = {a, b};
    c.params = {{"value", cfg_.c_unit * lr_um * nr * kFemto},
                {"lr", lr_um * kUm},
                {"nr", nr},
                {"m", 1.0}};
    cur_.instances.push_back(std::move(c));
  }
  void diode(const std::string& name, const std::string& anode, const std::string& cathode)
  {
    Instance d;
    d.name = "D" + name;
    d.kind = DeviceKind::Diode;
    d.master = "dio";
    d.terminals = {anode, cathode};
    d.params = {{"area", 1.0}, {"m", 1.0}};
    cur_.instances.push_back(std::move(d));
  }

private:
  const SynthConfig& cfg_;
  SubcktDef cur_;
};

std::string inverter(Builder& b, int strength)
{
  const std::string name = "inv_x" + std::to_string(strength);
  if (!b.has(name)) {
    b.open(name, {"in", "out", "vdd", "vss"});
    b.pmos("p", "out", "in", "vdd", 0.2 * strength);
    b.nmos("n", "out", "in", "vss", 0.1 * strength);
    b.close();
  }
  return name;
}

std::string nand(Builder& b, int k)
{
  const std::string name = "nand" + std::to_string(k);
  if (!b.has(name)) {
    b.open(name, cat({bus("a", k), {"y", "vdd", "vss"}}));
    for (int i = 0; i < k; ++i)
      b.pmos(idx("p", i), "y", idx("a", i), "vdd", 0.2);
    for (int i = 0; i < k; ++i) {
      const std::string top = i == 0 ? "y" : idx("s", i);
      const std::string bot = i == k - 1 ? "vss" : idx("s", i + 1);
      b.nmos(idx("n", i), top, idx("a", i), bot, 0.03);
    }
    b.close();
  }
  return name;
}

std::string and_gate(Builder& b, int k)
{
  const std::string name = "and" + std::to_string(k);
  if (!b.has(name)) {
    const std::string n = nand(b, k);
    const std::string inv = inverter(b, 1);
    b.open(name, cat({bus("a", k), {"y", "vdd", "vss"}}));
    b.x("n", n, cat({bus("a", k), {"yb", "vdd", "vss"}}));
    b.x("i", inv, {"yb", "y", "vdd", "vss"});
    b.close();
  }
  return name;
}

/// k address bits to 2^k one-hot lines.
std::string predecoder(Builder& b, int k)
{
  const std::string name = "predec" + std::to_string(k);
  if (!b.has(name)) {
    const std::string g = and_gate(b, k);
    const std::string inv = inverter(b, 1);
    b.open(name, cat({bus("a", k), bus("p", 1 << k), {"vdd", "vss"}}));
    for (int i = 0; i < k; ++i)
      b.x(idx("i", i), inv, {idx("a", i), idx("ab", i), "vdd", "vss"});
    for (int j = 0; j < (1 << k); ++j) {
      std::vector<std::string> in;
      for (int i = 0; i < k; ++i)
        in.push_back(((j >> i) & 1) ? idx("a", i) : idx("ab", i));
      b.x(idx("g", j), g, cat({in, {idx("p", j), "vdd", "vss"}}));
    }
    b.close();
  }
  return name;
}

std::string wldrv(Builder& b)
{
  if (!b.has("wldrv")) {
    const std::string n = nand(b, 2);
    const std::string inv = inverter(b, 4);
    b.open("wldrv", {"pa", "pb", "wl", "vdd", "vss"});
    b.x("n", n, {"pa", "pb", "wlb", "vdd", "vss"});
    b.x("d", inv, {"wlb", "wl", "vdd", "vss"});
    b.close();
  }
  return "wldrv";
}

std::string wlgroup(Builder& b, int size)
{
  const std::string name = "wlgroup" + std::to_string(size);
  if (!b.has(name)) {
    const std::string d = wldrv(b);
    b.open(name, cat({bus("pa", size), {"pb"}, bus("wl", size), {"vdd", "vss"}}));
    for (int i = 0; i < size; ++i)
      b.x(idx("d", i), d, {idx("pa", i), "pb", idx("wl", i), "vdd", "vss"});
    b.close();
  }
  return name;
}

std::string rowdec(Builder& b, int rows)
{
  const int nb = std::max(1, ceil_log2(rows));
  const int ha = (nb + 1) / 2;
  const int hb = nb - ha;
  const int group = 1 << ha;
  const std::string pa = predecoder(b, ha);
  const std::string pb = hb > 0 ? predecoder(b, hb) : "";
  std::vector<std::string> groups;
  for (int start = 0; start < rows; start += group)
    groups.push_back(wlgroup(b, std::min(group, rows - start)));

  b.open("rowdec", cat({bus("a", nb), bus("wl", rows), {"vdd", "vss"}}));
  b.x("pa", pa, cat({bus("a", ha), bus("pa", group), {"vdd", "vss"}}));
  if (hb > 0)
    b.x("pb", pb, cat({bus("a", hb, ha), bus("pb", 1 << hb), {"vdd", "vss"}}));
  for (std::size_t k = 0; k < groups.size(); ++k) {
    const int start = static_cast<int>(k) * group;
    const int size = std::min(group, rows - start);
    const std::string sel = hb > 0 ? idx("pb", static_cast<int>(k)) : "vdd";
    b.x(idx("g", static_cast<int>(k)), groups[k],
        cat({bus("pa", size), {sel}, bus("wl", size, start), {"vdd", "vss"}}));
  }
  b.close();
  return "rowdec";
}

/// One-hot select lines behind a predecoder; extra predecoder outputs stay
/// internal.
std::string seldec(Builder& b, const std::string& name, int lines)
{
  const int bits = std::max(1, ceil_log2(lines));
  const std::string p = predecoder(b, bits);
  b.open(name, cat({bus("a", bits), bus("sel", lines), {"vdd", "vss"}}));
  b.x("p", p, cat({bus("a", bits), bus("sel", lines), bus("nc", (1 << bits) - lines), {"vdd", "vss"}}));
  b.close();
  return name;
}

std::string cell(Builder& b)
{
  b.open("invc", {"in", "out", "vdd", "vss"});
  b.pmos("pu", "out", "in", "vdd", 0.05, "pch_pu");
  b.nmos("pd", "out", "in", "vss", 0.1, "nch_pd");
  b.close();

  b.open("cell6t", {"bl", "blb", "wl", "vdd", "vss"});
  b.x("i0", "invc", {"qb", "q", "vdd", "vss"});
  b.x("i1", "invc", {"q", "qb", "vdd", "vss"});
  b.nmos("pg0", "bl", "wl", "q", 0.075, "nch_pg");
  b.nmos("pg1", "blb", "wl", "qb", 0.075, "nch_pg");
  b.close();
  return "cell6t";
}

std::string segment(Builder& b, int rows, int cols)
{
  const std::string name = "segment" + std::to_string(rows);
  if (!b.has(name)) {
    b.open(name, cat({bus("gbl", cols), bus("gblb", cols), bus("wl", rows), {"segsel", "vdd", "vss"}}));
    for (int k = 0; k < cols; ++k) {
      b.nmos(idx("sw", k), idx("gbl", k), "segsel", idx("lbl", k), 0.2);
      b.nmos(idx("swb", k), idx("gblb", k), "segsel", idx("lblb", k), 0.2);
    }
    for (int r = 0; r < rows; ++r)
      for (int k = 0; k < cols; ++k)
        b.x("c" + std::to_string(r) + "_" + std::to_string(k), "cell6t",
            {idx("lbl", k), idx("lblb", k), idx("wl", r), "vdd", "vss"});
    b.close();
  }
  return name;
}

int segment_count(const SynthConfig& cfg)
{
  return cfg.rows > cfg.segment_rows ? (cfg.rows + cfg.segment_rows - 1) / cfg.segment_rows : 1;
}

/// Unsegmented arrays hang every cell on the bank bitlines; taller arrays
/// split into segments with local bitlines behind per-column switches.
std::string array(Builder& b, const SynthConfig& cfg)
{
  const int rows = cfg.rows;
  const int cols = cfg.cols;
  const std::string c = cell(b);
  const int segs = segment_count(cfg);
  if (segs == 1) {
    b.open("array", cat({bus("bl", cols), bus("blb", cols), bus("wl", rows), {"vdd", "vss"}}));
    for (int r = 0; r < rows; ++r)
      for (int k = 0; k < cols; ++k)
        b.x("c" + std::to_string(r) + "_" + std::to_string(k), c,
            {idx("bl", k), idx("blb", k), idx("wl", r), "vdd", "vss"});
    b.close();
    return "array";
  }
  std::vector<std::string> defs;
  for (int s = 0; s < segs; ++s)
    defs.push_back(segment(b, std::min(cfg.segment_rows, rows - s * cfg.segment_rows), cols));
  b.open("array", cat({bus("bl", cols), bus("blb", cols), bus("wl", rows), bus("segsel", segs),
                       {"vdd", "vss"}}));
  for (int s = 0; s < segs; ++s) {
    const int start = s * cfg.segment_rows;
    const int size = std::min(cfg.segment_rows, rows - start);
    b.x(idx("s", s), defs[static_cast<std::size_t>(s)],
        cat({bus("bl", cols), bus("blb", cols), bus("wl", size, start), {idx("segsel", s), "vdd", "vss"}}));
  }
  b.close();
  return "array";
}

std::string colio(Builder& b, int mux)
{
  b.open("precharge", {"bl", "blb", "pre_b", "vdd"});
  b.pmos("p0", "bl", "pre_b", "vdd", 0.2);
  b.pmos("p1", "blb", "pre_b", "vdd", 0.2);
  b.pmos("eq", "bl", "pre_b", "blb", 0.1);
  b.close();

  b.open("colmux", cat({bus("bl", mux), bus("blb", mux), bus("sel", mux), {"dl", "dlb", "vss"}}));
  for (int j = 0; j < mux; ++j) {
    b.nmos(idx("t", j), "dl", idx("sel", j), idx("bl", j), 0.2);
    b.nmos(idx("tb", j), "dlb", idx("sel", j), idx("blb", j), 0.2);
  }
  b.close();

  const std::string ob = inverter(b, 2);
  b.open("senseamp", {"dl", "dlb", "sae", "dout", "vdd", "vss"});
  b.pmos("l0", "dl", "dlb", "vdd", 0.15);
  b.pmos("l1", "dlb", "dl", "vdd", 0.15);
  b.nmos("l2", "dl", "dlb", "tail", 0.3);
  b.nmos("l3", "dlb", "dl", "tail", 0.3);
  b.nmos("en", "tail", "sae", "vss", 0.6);
  b.x("ob", ob, {"dlb", "dout", "vdd", "vss"});
  b.close();

  const std::string inv = inverter(b, 1);
  b.open("wrdrv", {"din", "wen", "dl", "dlb", "vdd", "vss"});
  b.x("i", inv, {"din", "dinb", "vdd", "vss"});
  b.nmos("w0", "dl", "wen", "x0", 0.4);
  b.nmos("d0", "x0", "dinb", "vss", 0.4);
  b.nmos("w1", "dlb", "wen", "x1", 0.4);
  b.nmos("d1", "x1", "din", "vss", 0.4);
  b.close();

  b.open("colio", cat({bus("bl", mux), bus("blb", mux), bus("sel", mux),
                       {"pre_b", "sae", "wen", "din", "dout", "vdd", "vss"}}));
  for (int j = 0; j < mux; ++j)
    b.x(idx("pc", j), "precharge", {idx("bl", j), idx("blb", j), "pre_b", "vdd"});
  b.x("mux", "colmux", cat({bus("bl", mux), bus("blb", mux), bus("sel", mux), {"dl", "dlb", "vss"}}));
  b.x("sa", "senseamp", {"dl", "dlb", "sae", "dout", "vdd", "vss"});
  b.x("wd", "wrdrv", {"din", "wen", "dl", "dlb", "vdd", "vss"});
  b.close();
  return "colio";
}

std::string ctrl(Builder& b)
{
  const std::string i1 = inverter(b, 1);
  const std::string i2 = inverter(b, 2);
  const std::string i4 = inverter(b, 4);
  const std::string a2 = and_gate(b, 2);
  b.open("ctrl", {"clk", "we", "pre_b", "sae", "wen", "vdd", "vss"});
  b.x("i0", i1, {"clk", "c1", "vdd", "vss"});
  b.x("i1", i1, {"c1", "c2", "vdd", "vss"});
  b.res("dly", "c2", "c3", 0.1, 2.0);
  b.cap("dly", "c3", "vss", 2.0, 20);
  b.x("i2", i2, {"c3", "c4", "vdd", "vss"});
  b.x("i3", i4, {"c4", "sae", "vdd", "vss"});
  b.x("i4", i4, {"c2", "pre_b", "vdd", "vss"});
  b.x("w", a2, {"we", "c1", "wen", "vdd", "vss"});
  b.close();
  return "ctrl";
}

struct Plan {
  int nb = 0;
  int cb = 0;
  int groups = 0;
};

std::vector<std::string> bank_ports(const Plan& p)
{
  return cat({{"clk", "we"}, bus("a", p.nb + p.cb), bus("din", p.groups), bus("dout", p.groups),
              {"vdd", "vss"}});
}

void bank(Builder& b, const SynthConfig& cfg, const Plan& p)
{
  const std::string rd = rowdec(b, cfg.rows);
  const std::string cd = seldec(b, "coldec", cfg.mux);
  const int segs = segment_count(cfg);
  const std::string sd = segs > 1 ? seldec(b, "segdec", segs) : "";
  const std::string ar = array(b, cfg);
  const std::string io = colio(b, cfg.mux);
  const std::string ct = ctrl(b);

  b.open("bank", bank_ports(p));
  b.x("ctl", ct, {"clk", "we", "pre_b", "sae", "wen", "vdd", "vss"});
  b.x("rdec", rd, cat({bus("a", p.nb), bus("wl", cfg.rows), {"vdd", "vss"}}));
  b.x("cdec", cd, cat({bus("a", p.cb, p.nb), bus("sel", cfg.mux), {"vdd", "vss"}}));
  if (segs > 1) {
    const int sb = std::max(1, ceil_log2(segs));
    b.x("sdec", sd, cat({bus("a", sb, p.nb - sb), bus("segsel", segs), {"vdd", "vss"}}));
    b.x("arr", ar, cat({bus("bl", cfg.cols), bus("blb", cfg.cols), bus("wl", cfg.rows),
                        bus("segsel", segs), {"vdd", "vss"}}));
  } else {
    b.x("arr", ar, cat({bus("bl", cfg.cols), bus("blb", cfg.cols), bus("wl", cfg.rows), {"vdd", "vss"}}));
  }
  for (int g = 0; g < p.groups; ++g)
    b.x(idx("io", g), io,
        cat({bus("bl", cfg.mux, g * cfg.mux), bus("blb", cfg.mux, g * cfg.mux), bus("sel", cfg.mux),
             {"pre_b", "sae", "wen", idx("din", g), idx("dout", g), "vdd", "vss"}}));
  b.close();
}

/// wrap<k> holds a clock buffer and the next level down.
std::string wrapper(Builder& b, const Plan& p, int k)
{
  const std::string name = "wrap" + std::to_string(k);
  if (b.has(name))
    return name;
  const std::string inner = k == 1 ? "bank" : wrapper(b, p, k - 1);
  const std::string i2 = inverter(b, 2);
  const std::string i4 = inverter(b, 4);
  if (!b.has("clkbuf")) {
    b.open("clkbuf", {"in", "out", "vdd", "vss"});
    b.x("i0", i2, {"in", "mid", "vdd", "vss"});
    b.x("i1", i4, {"mid", "out", "vdd", "vss"});
    b.close();
  }
  auto ports = bank_ports(p);
  b.open(name, ports);
  b.x("cb", "clkbuf", {"clk", "clkl", "vdd", "vss"});
  ports[0] = "clkl";
  b.x("core", inner, ports);
  b.close();
  return name;
}

SynthCounters count(const Netlist& nl)
{
  std::unordered_map<std::string, SynthCounters> memo;
  std::function<const SynthCounters&(const SubcktDef&)> below = [&](const SubcktDef& def)
      -> const SynthCounters& {
    if (auto it = memo.find(def.name); it != memo.end())
      return it->second;
    std::set<std::string> local;
    for (const auto& inst : def.instances)
      local.insert(inst.terminals.begin(), inst.terminals.end());
    for (const auto& port : def.ports)
      local.erase(port);
    SynthCounters c;
    c.nets = local.size();
    for (const auto& inst : def.instances) {
      if (inst.kind == DeviceKind::Subckt) {
        const SynthCounters& child = below(*nl.find(inst.master));
        c.nets += child.nets;
        c.devices += child.devices;
        c.subckt_instances += child.subckt_instances + 1;
      } else {
        ++c.devices;
      }
    }
    return memo.emplace(def.name, c).first->second;
  };
  const SubcktDef& top = nl.top_def();
  SynthCounters total = below(top);
  total.nets += top.ports.size();
  total.definitions = nl.subckts.size();
  return total;
}

/// Standard normal draws from a 64-bit engine via Box-Muller, so the
/// sequence does not depend on the standard library's distributions.
class Gaussian {
public:
  explicit Gaussian(std::uint64_t seed) : rng_(seed) {}

  double operator()()
  {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = (static_cast<double>(rng_() >> 11) + 1.0) * 0x1.0p-53;
    const double u2 = static_cast<double>(rng_() >> 11) * 0x1.0p-53;
    const double r = std::sqrt(-2.0 * std::log(u1));
    spare_ = r * std::sin(2.0 * std::numbers::pi * u2);
    has_spare_ = true;
    return r * std::cos(2.0 * std::numbers::pi * u2);
  }

private:
  std::mt19937_64 rng_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

LabelTable oracle_labels(const Netlist& nl, const SynthConfig& cfg)
{
  const FlatDesign flat = flatten(nl);
  const std::size_t n = flat.nets.size();
  std::vector<double> device_ff(n, 0.0);
  std::vector<int> fanout(n, 0);
  for (const auto& d : flat.devices) {
    const Instance& inst = *d.inst;
    std::set<int> touched(d.terminal_nets.begin(), d.terminal_nets.end());
    touched.erase(-1);
    for (int net : touched)
      ++fanout[static_cast<std::size_t>(net)];
    const double m = inst.param("m", 1.0);
    if (inst.kind == DeviceKind::Nmos || inst.kind == DeviceKind::Pmos) {
      const double w = inst.param("w") / kUm;
      const double l = inst.param("l") / kUm;
      for (std::size_t t = 0; t < d.terminal_nets.size(); ++t) {
        const int net = d.terminal_nets[t];
        if (net < 0)
          continue;
        if (t == 1)
          device_ff[static_cast<std::size_t>(net)] += cfg.k_gate * w * l * m;
        else if (t == 0 || t == 2)
          device_ff[static_cast<std::size_t>(net)] += cfg.k_sd * w * m;
      }
    } else if (inst.kind == DeviceKind::Cap) {
      for (int net : touched)
        device_ff[static_cast<std::size_t>(net)] += inst.param("value") / kFemto * m;
    }
  }

  Gaussian z(cfg.seed ^ 0x9e3779b97f4a7c15ULL);
  LabelTable table;
  table.schematic_nets = n;
  table.entries.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double lvl = cfg.lvl_top * std::pow(cfg.lvl_decay, flat.nets[i].owner_depth);
    const double wire = cfg.k_wire * std::pow(static_cast<double>(fanout[i]), cfg.fanout_exp) * lvl;
    const double noise = std::exp(cfg.noise_sigma * z());
    const double c_ff = (device_ff[i] + wire) * noise;
    if (!(c_ff > 0.0) || !std::isfinite(c_ff))
      throw NumericError("oracle produced a non-positive capacitance for '" +
                         flat.nets[i].canonical + "'");
    table.entries.emplace_back(flat.nets[i].canonical, c_ff * kFemto);
  }
  table.stats.matched = n;
  return table;
}

} // namespace

SynthDesign generate_synthetic(const SynthConfig& cfg)
{
  if (cfg.rows < 1 || cfg.cols < 1)
    throw UsageError("rows and cols must be at least 1");
  if (cfg.segment_rows < 1)
    throw UsageError("segment_rows must be at least 1");
  if (cfg.banks < 1)
    throw UsageError("banks must be at least 1");
  if (cfg.mux < 2 || (cfg.mux & (cfg.mux - 1)) != 0 || cfg.cols % cfg.mux != 0)
    throw UsageError("mux must be a power of two >= 2 that divides cols");
  if (!(cfg.noise_sigma >= 0.0) || !(cfg.lvl_top > 0.0) || !(cfg.lvl_decay > 0.0) ||
      !(cfg.k_wire >= 0.0) || !(cfg.k_gate >= 0.0) || !(cfg.k_sd >= 0.0) || !(cfg.c_unit > 0.0))
    throw UsageError("synthetic capacitance constants must be non-negative");

  Plan p;
  p.nb = std::max(1, ceil_log2(cfg.rows));
  p.cb = ceil_log2(cfg.mux);
  p.groups = cfg.cols / cfg.mux;

  Builder b(cfg);
  bank(b, cfg, p);
  for (int k = 1; k < cfg.banks; ++k)
    wrapper(b, p, k);

  std::vector<std::string> dout;
  for (int k = 0; k < cfg.banks; ++k)
    for (int g = 0; g < p.groups; ++g)
      dout.push_back("dout" + std::to_string(k) + "_" + std::to_string(g));
  const std::vector<std::string> pins =
      cat({{"clk", "we"}, bus("a", p.nb + p.cb), bus("din", p.groups), dout});
  b.open("sram", cat({{"vdd", "vss"}, pins}));
  for (int k = 0; k < cfg.banks; ++k) {
    auto ports = bank_ports(p);
    for (int g = 0; g < p.groups; ++g)
      ports[static_cast<std::size_t>(2 + p.nb + p.cb + p.groups + g)] =
          "dout" + std::to_string(k) + "_" + std::to_string(g);
    b.x(idx("bank", k), k == 0 ? "bank" : "wrap" + std::to_string(k), ports);
  }
  for (const auto& pin : pins) {
    b.diode("n_" + pin, "vss", pin);
    b.diode("p_" + pin, pin, "vdd");
  }
  b.cap("decap", "vdd", "vss", 10.0, 200);
  b.close();

  SynthDesign out;
  out.netlist = std::move(b.netlist);
  out.netlist.top = "sram";
  out.netlist.source_files = {"<synthetic>"};
  out.counters = count(out.netlist);
  out.labels = oracle_labels(out.netlist, cfg);
  return out;
}

std::string write_oracle_spf(const LabelTable& labels, const std::string& design)
{
  std::ostringstream os;
  os << "*|DSPF 1.3\n*|DESIGN \"" << design << "\"\n*|DIVIDER /\n*|DELIMITER :\n";
  os << ".SUBCKT " << design << "\n";
  std::size_t k = 0;
  for (const auto& [name, farads] : labels.entries) {
    const double a = farads * 0.625;
    os << "\n*|NET " << name << ' ' << format_number(farads) << '\n';
    os << "*|I (" << name << ":1 " << name << ":1 B 0 0 0)\n";
    os << "C" << k++ << ' ' << name << ":1 0 " << format_number(a) << '\n';
    os << "C" << k++ << ' ' << name << ":2 0 " << format_number(farads - a) << '\n';
    os << "R" << k++ << ' ' << name << ":1 " << name << ":2 1.0\n";
  }
  os << "\n.ENDS\n";
  return os.str();
}

} // namespace paracap
