#include "paracap/spf.hpp"
#include "paracap/error.hpp"
#include "paracap/units.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <sstream>
#include <tuple>
#include <unordered_map>
#include <unordered_set>

namespace paracap {

namespace {

std::vector<std::string> split_ws(std::string_view line)
{
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t'))
      ++i;
    std::size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t')
      ++i;
    if (i > start)
      out.emplace_back(line.substr(start, i - start));
  }
  return out;
}

struct RawElement {
  CapElement cap;
  int block = -1;
  std::size_t line = 0;
};

class SpfParser {
public:
  explicit SpfParser(const SpfOptions& options) : options_(options) {}

  std::vector<ParasiticNet> parse(std::string_view text)
  {
    std::size_t pos = 0;
    std::size_t line_no = 0;
    std::string pending;
    std::size_t pending_line = 0;
    auto flush = [&]() {
      if (!pending.empty())
        card(pending, pending_line);
      pending.clear();
    };
    while (pos <= text.size()) {
      std::size_t end = text.find('\n', pos);
      if (end == std::string_view::npos)
        end = text.size();
      std::string_view line = text.substr(pos, end - pos);
      pos = end + 1;
      ++line_no;
      if (!line.empty() && line.back() == '\r')
        line.remove_suffix(1);
      const std::size_t first = line.find_first_not_of(" \t");
      if (first == std::string_view::npos)
        continue;
      line = line.substr(first);
      if (line[0] == '+') {
        pending += ' ';
        pending += line.substr(1);
        continue;
      }
      flush();
      if (line.starts_with("*|")) {
        header(line.substr(2), line_no);
      } else if (line[0] == '*') {
        continue;
      } else {
        pending = std::string(line);
        pending_line = line_no;
      }
    }
    flush();
    return finish();
  }

private:
  [[noreturn]] void fail(std::size_t line, const std::string& msg) const
  {
    throw ParseError(options_.source, line, 1, msg);
  }

  std::string normalise(std::string_view name) const
  {
    std::string out(name);
    if (divider_ != kPathSeparator)
      std::replace(out.begin(), out.end(), divider_, kPathSeparator);
    return out;
  }

  void header(std::string_view body, std::size_t line)
  {
    // Strip parentheses used by *|P (...) / *|I (...) forms.
    std::string flat(body);
    std::replace(flat.begin(), flat.end(), '(', ' ');
    std::replace(flat.begin(), flat.end(), ')', ' ');
    auto tok = split_ws(flat);
    if (tok.empty())
      return;
    const std::string kw = to_lower(tok[0]);
    if (kw == "divider") {
      if (tok.size() < 2 || tok[1].size() != 1)
        fail(line, "malformed *|DIVIDER");
      divider_ = tok[1][0];
    } else if (kw == "delimiter") {
      if (tok.size() < 2 || tok[1].size() != 1)
        fail(line, "malformed *|DELIMITER");
      delimiter_ = tok[1][0];
    } else if (kw == "net") {
      if (tok.size() < 2)
        fail(line, "*|NET requires a net name");
      ParasiticNet net;
      net.name = normalise(tok[1]);
      if (tok.size() >= 3) {
        auto v = parse_spice_number(tok[2]);
        if (!v)
          fail(line, "malformed capacitance '" + tok[2] + "' on *|NET " + tok[1]);
        if (*v < 0)
          fail(line, "negative capacitance on *|NET " + tok[1]);
        net.lumped_cap = *v;
      }
      const std::string key = to_lower(net.name);
      if (block_index_.contains(key))
        fail(line, "duplicate net block '" + net.name + "'");
      block_index_.emplace(key, static_cast<int>(nets_.size()));
      current_ = static_cast<int>(nets_.size());
      nets_.push_back(std::move(net));
    } else if (kw == "p" || kw == "i" || kw == "s") {
      if (current_ < 0)
        fail(line, "*|" + tok[0] + " outside a *|NET block");
      if (tok.size() < 2)
        fail(line, "malformed *|" + tok[0] + " line");
      const std::string node = normalise(tok[1]);
      nets_[static_cast<std::size_t>(current_)].pins.push_back(node);
      declared_.emplace(to_lower(node), current_);
    }
    // Other header fields (DSPF, DESIGN, VENDOR, ...) carry no structure.
  }

  void card(const std::string& text, std::size_t line)
  {
    auto tok = split_ws(text);
    const char c = static_cast<char>(std::tolower(static_cast<unsigned char>(tok[0][0])));
    if (tok[0][0] == '.') {
      const std::string kw = to_lower(tok[0]);
      if (kw == ".ends" || kw == ".end")
        current_ = -1;
      return;
    }
    if (c != 'c')
      return; // resistors and instance cards are not modelled
    if (tok.size() < 4)
      fail(line, "malformed capacitor card '" + text + "'");
    auto v = parse_spice_number(tok[3]);
    if (!v || !std::isfinite(*v))
      fail(line, "malformed capacitance '" + tok[3] + "'");
    if (*v < 0)
      fail(line, "negative capacitance in '" + tok[0] + "'");
    if (*v == 0)
      return;
    RawElement e;
    e.cap.name = tok[0];
    e.cap.node_a = normalise(tok[1]);
    e.cap.node_b = normalise(tok[2]);
    e.cap.farads = *v;
    e.block = current_;
    e.line = line;
    raw_.push_back(std::move(e));
  }

  // -1 ground, -2 unknown node, otherwise block index.
  int resolve(const std::string& node) const
  {
    if (node == kGroundNet)
      return -1;
    const std::string key = to_lower(node);
    if (auto it = declared_.find(key); it != declared_.end())
      return it->second;
    if (auto it = block_index_.find(key); it != block_index_.end())
      return it->second;
    if (const auto d = key.rfind(delimiter_); d != std::string::npos && d > 0) {
      if (auto it = block_index_.find(key.substr(0, d)); it != block_index_.end())
        return it->second;
    }
    return -2;
  }

  std::vector<ParasiticNet> finish()
  {
    for (RawElement& e : raw_) {
      const int a = resolve(e.cap.node_a);
      const int b = resolve(e.cap.node_b);
      int owner = e.block;
      if (owner < 0)
        owner = a >= 0 ? a : b;
      if (owner < 0)
        fail(e.line, "capacitor '" + e.cap.name + "' cannot be attributed to a net");
      int other = -3;
      std::string other_name;
      for (int end : {a, b}) {
        if (end == owner || end == -1)
          continue;
        other = end;
      }
      if (other >= 0) {
        other_name = nets_[static_cast<std::size_t>(other)].name;
      } else if (other == -2) {
        other_name = (a == -2) ? e.cap.node_a : e.cap.node_b;
      }
      CapElement mine = e.cap;
      mine.coupled_net = other_name;
      nets_[static_cast<std::size_t>(owner)].elements.push_back(mine);
      if (other >= 0) {
        CapElement theirs = e.cap;
        theirs.coupled_net = nets_[static_cast<std::size_t>(owner)].name;
        nets_[static_cast<std::size_t>(other)].elements.push_back(std::move(theirs));
      }
    }
    return std::move(nets_);
  }

  const SpfOptions& options_;
  char divider_ = kPathSeparator;
  char delimiter_ = ':';
  int current_ = -1;
  std::vector<ParasiticNet> nets_;
  std::unordered_map<std::string, int> block_index_;
  std::unordered_map<std::string, int> declared_;
  std::vector<RawElement> raw_;
};

} // namespace

std::vector<ParasiticNet> parse_spf(std::string_view text, const SpfOptions& options)
{
  return SpfParser(options).parse(text);
}

std::string emit_spf(const std::vector<ParasiticNet>& nets, const std::string& design)
{
  std::ostringstream os;
  os << "*|DSPF 1.3\n*|DESIGN \"" << design << "\"\n*|DIVIDER /\n*|DELIMITER :\n";
  os << ".SUBCKT " << design << "\n";
  std::unordered_set<std::string> written;
  for (const auto& net : nets) {
    os << "*|NET " << net.name;
    if (net.lumped_cap)
      os << ' ' << format_number(*net.lumped_cap);
    os << '\n';
    for (const auto& pin : net.pins)
      os << "*|I (" << pin << ")\n";
    for (const auto& e : net.elements) {
      if (!written.insert(e.name).second)
        continue;
      os << e.name << ' ' << e.node_a << ' ' << e.node_b << ' ' << format_number(e.farads) << '\n';
    }
    os << '\n';
  }
  os << ".ENDS\n";
  return os.str();
}

bool spf_structurally_equal(const std::vector<ParasiticNet>& a, const std::vector<ParasiticNet>& b)
{
  if (a.size() != b.size())
    return false;
  auto key = [](const CapElement& e) {
    return std::tie(e.name, e.node_a, e.node_b, e.farads, e.coupled_net);
  };
  for (std::size_t i = 0; i < a.size(); ++i) {
    const auto& x = a[i];
    const auto& y = b[i];
    if (x.name != y.name || x.lumped_cap != y.lumped_cap || x.pins != y.pins ||
        x.elements.size() != y.elements.size())
      return false;
    auto ex = x.elements;
    auto ey = y.elements;
    auto less = [&](const CapElement& p, const CapElement& q) { return key(p) < key(q); };
    std::sort(ex.begin(), ex.end(), less);
    std::sort(ey.begin(), ey.end(), less);
    for (std::size_t k = 0; k < ex.size(); ++k)
      if (key(ex[k]) != key(ey[k]))
        return false;
  }
  return true;
}

double compute_ceff(const ParasiticNet& net, const CeffOptions& options)
{
  if (net.lumped_cap)
    return *net.lumped_cap;
  if (net.elements.empty())
    throw DataError("net '" + net.name + "' has neither a total capacitance nor elements");
  double sum = 0.0;
  for (const auto& e : net.elements)
    sum += e.coupled_net.empty() ? e.farads : e.farads * options.coupling_factor;
  return sum;
}

double MatchStats::match_rate(std::size_t schematic_nets) const
{
  return schematic_nets == 0 ? 0.0
                             : static_cast<double>(matched) / static_cast<double>(schematic_nets);
}

std::optional<double> LabelTable::find(std::string_view canonical) const
{
  for (const auto& [name, value] : entries)
    if (name == canonical)
      return value;
  return std::nullopt;
}

LabelTable build_labels(const std::vector<ParasiticNet>& nets, const Netlist& schematic,
                        const NameOptions& names, const CeffOptions& ceff)
{
  LabelTable table;
  const FlatDesign flat = flatten(schematic, names);
  table.schematic_nets = flat.nets.size();

  std::vector<std::optional<double>> value(flat.nets.size());
  std::vector<bool> seen(flat.nets.size(), false);
  for (const auto& net : nets) {
    const int idx = flat.find_net(net.name, names);
    if (idx < 0 || seen[static_cast<std::size_t>(idx)]) {
      ++table.stats.spf_unmatched;
      table.stats.spf_misses.push_back(net.name);
      continue;
    }
    seen[static_cast<std::size_t>(idx)] = true;
    ++table.stats.matched;
    const double c = compute_ceff(net, ceff);
    if (!(c > 0.0)) {
      ++table.stats.nonpositive;
      continue;
    }
    if (c <= kBelowRangeFarads)
      ++table.stats.below_range;
    value[static_cast<std::size_t>(idx)] = c;
  }
  for (std::size_t i = 0; i < flat.nets.size(); ++i) {
    if (!seen[i]) {
      ++table.stats.schematic_unmatched;
      table.stats.schematic_misses.push_back(flat.nets[i].canonical);
    }
    if (value[i])
      table.entries.emplace_back(flat.nets[i].canonical, *value[i]);
  }
  return table;
}

std::string write_label_table(const LabelTable& table, CapUnit unit)
{
  std::ostringstream os;
  os << "# paracap labels v1: <canonical-net> <C_eff> (" << cap_unit_name(unit) << ")\n";
  for (const auto& [name, c] : table.entries)
    os << name << ' ' << format_capacitance(c, unit) << '\n';
  return os.str();
}

LabelTable read_label_table(std::string_view text, const std::string& source)
{
  LabelTable table;
  std::size_t pos = 0;
  std::size_t line_no = 0;
  std::unordered_set<std::string> seen;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos)
      end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    auto tok = split_ws(line);
    if (tok.empty() || tok[0][0] == '#')
      continue;
    if (tok.size() != 2)
      throw ParseError(source, line_no, 1, "expected '<net> <farads>'");
    auto v = parse_spice_number(tok[1]);
    if (!v || !std::isfinite(*v) || *v <= 0)
      throw ParseError(source, line_no, tok[0].size() + 2, "invalid capacitance '" + tok[1] + "'");
    if (!seen.insert(tok[0]).second)
      throw ParseError(source, line_no, 1, "duplicate net '" + tok[0] + "'");
    if (*v <= kBelowRangeFarads)
      ++table.stats.below_range;
    table.entries.emplace_back(tok[0], *v);
  }
  table.stats.matched = table.entries.size();
  table.schematic_nets = table.entries.size();
  return table;
}

nlohmann::json label_report(const LabelTable& table)
{
  nlohmann::json j;
  j["labels"] = table.entries.size();
  j["schematic_nets"] = table.schematic_nets;
  j["matched"] = table.stats.matched;
  j["spf_unmatched"] = table.stats.spf_unmatched;
  j["schematic_unmatched"] = table.stats.schematic_unmatched;
  j["match_rate"] = table.stats.match_rate(table.schematic_nets);
  j["nonpositive"] = table.stats.nonpositive;
  j["below_range_flagged"] = table.stats.below_range;
  j["supply_nets_counted"] = true;

  // Decades (10^k, 10^(k+1)] fF, matching the half-open class bins.
  std::map<int, std::size_t> decades;
  for (const auto& [name, c] : table.entries) {
    const double ff = c / kFemto;
    int k = static_cast<int>(std::floor(std::log10(ff)));
    if (std::pow(10.0, k) >= ff)
      --k;
    ++decades[k];
  }
  nlohmann::json hist = nlohmann::json::array();
  for (const auto& [k, n] : decades)
    hist.push_back({{"lo_fF", std::pow(10.0, k)}, {"hi_fF", std::pow(10.0, k + 1)}, {"count", n}});
  j["histogram"] = hist;
  return j;
}

} // namespace paracap
