#include "paracap/netlist.hpp"
#include "paracap/error.hpp"
#include "paracap/units.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

namespace paracap {

const char* device_kind_name(DeviceKind kind)
{
  switch (kind) {
  case DeviceKind::Nmos: return "NMOS";
  case DeviceKind::Pmos: return "PMOS";
  case DeviceKind::Res: return "RES";
  case DeviceKind::Cap: return "CAP";
  case DeviceKind::Diode: return "DIODE";
  case DeviceKind::Subckt: return "SUBCKT";
  }
  return "?";
}

std::optional<DeviceKind> device_kind_from_name(std::string_view name)
{
  for (DeviceKind k : {DeviceKind::Nmos, DeviceKind::Pmos, DeviceKind::Res, DeviceKind::Cap,
                       DeviceKind::Diode, DeviceKind::Subckt}) {
    if (iequals(name, device_kind_name(k)))
      return k;
  }
  return std::nullopt;
}

int device_type_code(DeviceKind kind)
{
  switch (kind) {
  case DeviceKind::Nmos: return 1;
  case DeviceKind::Pmos: return 2;
  case DeviceKind::Res: return 3;
  case DeviceKind::Cap: return 4;
  case DeviceKind::Diode: return 5;
  case DeviceKind::Subckt: return 0;
  }
  return 0;
}

bool is_primitive(DeviceKind kind) { return kind != DeviceKind::Subckt; }

double Instance::param(std::string_view key, double fallback) const
{
  auto it = params.find(std::string(key));
  return it == params.end() ? fallback : it->second;
}

std::vector<std::string> SubcktDef::nets() const
{
  std::vector<std::string> out;
  std::unordered_set<std::string> seen;
  auto add = [&](const std::string& n) {
    if (seen.insert(n).second)
      out.push_back(n);
  };
  for (const auto& p : ports)
    add(p);
  for (const auto& inst : instances)
    for (const auto& t : inst.terminals)
      add(t);
  return out;
}

std::size_t SubcktDef::device_count() const
{
  return static_cast<std::size_t>(std::count_if(
      instances.begin(), instances.end(), [](const Instance& i) { return is_primitive(i.kind); }));
}

const SubcktDef* Netlist::find(std::string_view name) const
{
  for (const auto& s : subckts)
    if (iequals(s.name, name))
      return &s;
  return nullptr;
}

SubcktDef* Netlist::find(std::string_view name)
{
  for (auto& s : subckts)
    if (iequals(s.name, name))
      return &s;
  return nullptr;
}

const SubcktDef& Netlist::top_def() const
{
  const SubcktDef* t = find(top);
  if (!t)
    throw DataError("netlist has no top-level subcircuit");
  return *t;
}

bool Netlist::structurally_equal(const Netlist& other) const
{
  return subckts == other.subckts && iequals(top, other.top) &&
         implicit_top == other.implicit_top;
}

namespace {

struct Token {
  std::string text;
  std::size_t column = 1;
};

struct Card {
  std::vector<Token> tokens;
  std::size_t line = 1;
};

class Lexer {
public:
  Lexer(std::string_view text, std::string source) : text_(text), source_(std::move(source)) {}

  std::vector<Card> cards()
  {
    std::vector<Card> out;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text_.size()) {
      std::size_t end = text_.find('\n', pos);
      if (end == std::string_view::npos)
        end = text_.size();
      std::string_view line = text_.substr(pos, end - pos);
      ++line_no;
      pos = end + 1;
      if (!line.empty() && line.back() == '\r')
        line.remove_suffix(1);
      if (const auto dollar = line.find('$'); dollar != std::string_view::npos)
        line = line.substr(0, dollar);

      std::size_t first = line.find_first_not_of(" \t");
      if (first == std::string_view::npos)
        continue;
      if (line[first] == '*')
        continue;
      if (line[first] == '+') {
        if (out.empty())
          throw ParseError(source_, line_no, first + 1, "continuation line without a card");
        tokenize(line, first + 1, out.back().tokens);
        continue;
      }
      Card card;
      card.line = line_no;
      tokenize(line, first, card.tokens);
      if (!card.tokens.empty())
        out.push_back(std::move(card));
      if (end == text_.size())
        break;
    }
    return out;
  }

private:
  static void tokenize(std::string_view line, std::size_t from, std::vector<Token>& out)
  {
    std::size_t i = from;
    while (i < line.size()) {
      while (i < line.size() && (line[i] == ' ' || line[i] == '\t'))
        ++i;
      if (i >= line.size())
        break;
      std::size_t start = i;
      if (line[i] == '=') {
        ++i;
      } else {
        while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '=')
          ++i;
      }
      out.push_back({std::string(line.substr(start, i - start)), start + 1});
    }
    // Glue "k", "=", "v" into "k=v".
    std::vector<Token> glued;
    for (std::size_t k = 0; k < out.size(); ++k) {
      if (out[k].text == "=" && !glued.empty() && k + 1 < out.size()) {
        glued.back().text += "=" + out[k + 1].text;
        ++k;
      } else {
        glued.push_back(out[k]);
      }
    }
    out = std::move(glued);
  }

  std::string_view text_;
  std::string source_;
};

struct Location {
  std::size_t line = 0;
  std::size_t column = 0;
};

class NetlistParser {
public:
  explicit NetlistParser(std::string source) : source_(std::move(source)) {}

  void feed(std::string_view text)
  {
    Lexer lexer(text, source_);
    for (Card& card : lexer.cards())
      handle(card);
    if (open_) {
      throw ParseError(source_, open_line_, 1,
                       "missing .ENDS for subcircuit '" + current_.name + "'");
    }
  }

  void set_source(std::string source) { source_ = std::move(source); }

  Netlist finish(const std::string& forced_top)
  {
    Netlist n;
    n.subckts = std::move(defs_);
    if (!loose_.instances.empty()) {
      if (n.find("top"))
        throw ParseError(source_, loose_line_, 1,
                         "cards outside .SUBCKT conflict with a subcircuit named 'top'");
      loose_.name = "top";
      n.subckts.push_back(std::move(loose_));
      n.implicit_top = true;
      n.top = "top";
    }
    resolve(n);
    check_recursion(n);
    if (!forced_top.empty()) {
      const SubcktDef* t = n.find(forced_top);
      if (!t)
        throw DataError("requested top subcircuit '" + forced_top + "' is not defined");
      n.top = t->name;
      n.implicit_top = n.implicit_top && iequals(t->name, "top");
    } else if (n.top.empty() && !n.subckts.empty()) {
      n.top = infer_top(n.subckts);
    }
    return n;
  }

private:
  [[noreturn]] void fail(const Card& card, std::size_t tok, const std::string& msg) const
  {
    std::size_t col = tok < card.tokens.size() ? card.tokens[tok].column : 1;
    throw ParseError(source_, card.line, col, msg);
  }

  void handle(const Card& card)
  {
    const std::string& head = card.tokens[0].text;
    if (head[0] == '.') {
      directive(card);
      return;
    }
    Instance inst = instance(card);
    SubcktDef& target = open_ ? current_ : loose_;
    if (!open_ && loose_.instances.empty())
      loose_line_ = card.line;
    const std::string key = to_lower(inst.name);
    auto& names = open_ ? current_names_ : loose_names_;
    if (!names.insert(key).second)
      fail(card, 0, "duplicate instance name '" + inst.name + "'");
    if (inst.kind == DeviceKind::Subckt)
      locations_[&target == &loose_ ? std::string("\x01top") : current_.name]
          .push_back({card.line, card.tokens[0].column});
    else
      locations_[&target == &loose_ ? std::string("\x01top") : current_.name].push_back({});
    target.instances.push_back(std::move(inst));
  }

  void directive(const Card& card)
  {
    const std::string kw = to_lower(card.tokens[0].text);
    if (kw == ".subckt") {
      if (open_)
        fail(card, 0, "nested .SUBCKT is not supported");
      if (card.tokens.size() < 2)
        fail(card, 0, ".SUBCKT requires a name");
      current_ = SubcktDef{};
      current_.name = card.tokens[1].text;
      std::set<std::string> seen_ports;
      for (std::size_t i = 2; i < card.tokens.size(); ++i) {
        const std::string& t = card.tokens[i].text;
        if (t.find('=') != std::string::npos)
          fail(card, i, "subcircuit parameters are not supported");
        if (!seen_ports.insert(to_lower(t)).second)
          fail(card, i, "duplicate port '" + t + "'");
        current_.ports.push_back(t);
      }
      for (const auto& d : defs_)
        if (iequals(d.name, current_.name))
          fail(card, 1, "duplicate subcircuit '" + current_.name + "'");
      current_names_.clear();
      open_ = true;
      open_line_ = card.line;
    } else if (kw == ".ends") {
      if (!open_)
        fail(card, 0, ".ENDS without .SUBCKT");
      if (card.tokens.size() > 1 && !iequals(card.tokens[1].text, current_.name))
        fail(card, 1, ".ENDS name does not match '" + current_.name + "'");
      defs_.push_back(std::move(current_));
      current_ = SubcktDef{};
      open_ = false;
    } else if (kw == ".end") {
      if (open_)
        fail(card, 0, ".END inside .SUBCKT '" + current_.name + "'");
    } else if (kw == ".model" || kw == ".option" || kw == ".options" || kw == ".temp" ||
               kw == ".title") {
      // no structural effect
    } else {
      fail(card, 0, "unsupported directive '" + card.tokens[0].text + "'");
    }
  }

  void parse_params(const Card& card, std::size_t from, Instance& inst) const
  {
    for (std::size_t i = from; i < card.tokens.size(); ++i) {
      const std::string& t = card.tokens[i].text;
      const auto eq = t.find('=');
      if (eq == std::string::npos)
        fail(card, i, "expected key=value parameter, got '" + t + "'");
      if (eq == 0 || eq + 1 >= t.size())
        fail(card, i, "malformed parameter '" + t + "'");
      auto v = parse_spice_number(std::string_view(t).substr(eq + 1));
      if (!v)
        fail(card, i, "unsupported parameter value '" + t.substr(eq + 1) +
                          "' (expressions are not supported)");
      inst.params[to_lower(t.substr(0, eq))] = *v;
    }
  }

  Instance instance(const Card& card)
  {
    const std::string& name = card.tokens[0].text;
    std::size_t first_param = card.tokens.size();
    for (std::size_t i = 1; i < card.tokens.size(); ++i) {
      if (card.tokens[i].text.find('=') != std::string::npos) {
        first_param = i;
        break;
      }
    }
    std::vector<std::string> pos;
    for (std::size_t i = 1; i < first_param; ++i)
      pos.push_back(card.tokens[i].text);

    Instance inst;
    inst.name = name;
    const char prefix = static_cast<char>(std::tolower(static_cast<unsigned char>(name[0])));
    switch (prefix) {
    case 'm': {
      if (pos.size() != 5)
        fail(card, 0, "MOS card '" + name + "' needs 4 terminals and a model, got " +
                          std::to_string(pos.size()) + " fields");
      inst.master = pos[4];
      const char pol = static_cast<char>(std::tolower(static_cast<unsigned char>(inst.master[0])));
      if (pol == 'n')
        inst.kind = DeviceKind::Nmos;
      else if (pol == 'p')
        inst.kind = DeviceKind::Pmos;
      else
        fail(card, 5, "cannot infer MOS polarity from model '" + inst.master + "'");
      inst.terminals.assign(pos.begin(), pos.begin() + 4);
      break;
    }
    case 'r':
    case 'c': {
      inst.kind = prefix == 'r' ? DeviceKind::Res : DeviceKind::Cap;
      if (pos.size() >= 3) {
        if (auto v = parse_spice_number(pos.back())) {
          inst.params["value"] = *v;
          pos.pop_back();
        }
      }
      if (pos.size() == 2) {
        inst.terminals = pos;
      } else if (pos.size() == 3 || pos.size() == 4) {
        inst.master = pos.back();
        pos.pop_back();
        inst.terminals = pos;
      } else {
        fail(card, 0, std::string(prefix == 'r' ? "resistor" : "capacitor") + " card '" + name +
                          "' needs 2 or 3 terminals");
      }
      break;
    }
    case 'd': {
      inst.kind = DeviceKind::Diode;
      if (pos.size() >= 4) {
        if (auto v = parse_spice_number(pos.back())) {
          inst.params["area"] = *v;
          pos.pop_back();
        }
      }
      if (pos.size() != 3 && pos.size() != 4)
        fail(card, 0, "diode card '" + name + "' needs 2 or 3 terminals and a model");
      inst.master = pos.back();
      pos.pop_back();
      inst.terminals = pos;
      break;
    }
    case 'x': {
      inst.kind = DeviceKind::Subckt;
      pos.erase(std::remove(pos.begin(), pos.end(), "/"), pos.end());
      if (pos.empty())
        fail(card, 0, "instance card '" + name + "' has no master");
      inst.master = pos.back();
      pos.pop_back();
      inst.terminals = pos;
      break;
    }
    default:
      fail(card, 0, std::string("unknown device prefix '") + name[0] + "'");
    }
    for (const auto& t : inst.terminals) {
      if (t.find_first_of("()") != std::string::npos)
        fail(card, 0, "invalid net name '" + t + "'");
    }
    parse_params(card, first_param, inst);
    if (is_primitive(inst.kind) && !inst.params.contains("m"))
      inst.params["m"] = 1.0;
    return inst;
  }

  void resolve(const Netlist& n) const
  {
    for (const auto& def : n.subckts) {
      const std::string key = (n.implicit_top && &def == &n.subckts.back()) ? std::string("\x01top")
                                                                             : def.name;
      auto loc_it = locations_.find(key);
      for (std::size_t i = 0; i < def.instances.size(); ++i) {
        const Instance& inst = def.instances[i];
        if (inst.kind != DeviceKind::Subckt)
          continue;
        Location loc = loc_it != locations_.end() && i < loc_it->second.size()
                           ? loc_it->second[i]
                           : Location{};
        const SubcktDef* m = n.find(inst.master);
        if (!m)
          throw ParseError(source_, loc.line, loc.column,
                           "unresolved subcircuit '" + inst.master + "' in instance '" +
                               inst.name + "'");
        if (m->ports.size() != inst.terminals.size())
          throw ParseError(source_, loc.line, loc.column,
                           "instance '" + inst.name + "' binds " +
                               std::to_string(inst.terminals.size()) + " nets but '" + m->name +
                               "' has " + std::to_string(m->ports.size()) + " ports");
      }
    }
  }

  void check_recursion(const Netlist& n) const
  {
    std::unordered_map<std::string, int> state; // 0 unvisited, 1 active, 2 done
    std::function<void(const SubcktDef&)> visit = [&](const SubcktDef& d) {
      const std::string key = to_lower(d.name);
      int& s = state[key];
      if (s == 2)
        return;
      if (s == 1)
        throw ParseError(source_, 0, 0, "recursive subcircuit definition '" + d.name + "'");
      s = 1;
      for (const auto& inst : d.instances)
        if (inst.kind == DeviceKind::Subckt)
          visit(*n.find(inst.master));
      state[key] = 2;
    };
    for (const auto& d : n.subckts)
      visit(d);
  }

  std::string source_;
  std::vector<SubcktDef> defs_;
  SubcktDef current_;
  SubcktDef loose_;
  bool open_ = false;
  std::size_t open_line_ = 0;
  std::size_t loose_line_ = 0;
  std::set<std::string> current_names_;
  std::set<std::string> loose_names_;
  std::unordered_map<std::string, std::vector<Location>> locations_;
};

std::string read_file(const std::string& path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw DataError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

} // namespace

std::string infer_top(const std::vector<SubcktDef>& subckts)
{
  std::unordered_set<std::string> referenced;
  for (const auto& d : subckts)
    for (const auto& inst : d.instances)
      if (inst.kind == DeviceKind::Subckt)
        referenced.insert(to_lower(inst.master));

  std::unordered_map<std::string, const SubcktDef*> by_name;
  for (const auto& d : subckts)
    by_name[to_lower(d.name)] = &d;
  std::unordered_map<std::string, double> memo;
  std::function<double(const SubcktDef&)> size = [&](const SubcktDef& d) -> double {
    const std::string key = to_lower(d.name);
    if (auto it = memo.find(key); it != memo.end())
      return it->second;
    double total = 0;
    for (const auto& inst : d.instances) {
      total += 1;
      if (inst.kind == DeviceKind::Subckt)
        if (auto it = by_name.find(to_lower(inst.master)); it != by_name.end())
          total += size(*it->second);
    }
    memo[key] = total;
    return total;
  };

  const SubcktDef* best = nullptr;
  double best_size = -1;
  for (const auto& d : subckts) {
    if (referenced.contains(to_lower(d.name)))
      continue;
    const double s = size(d);
    if (!best || s > best_size || (s == best_size && to_lower(d.name) < to_lower(best->name))) {
      best = &d;
      best_size = s;
    }
  }
  return best ? best->name : std::string{};
}

Netlist parse_netlist(std::string_view text, const ParseOptions& options)
{
  NetlistParser parser(options.source);
  parser.feed(text);
  Netlist n = parser.finish(options.top);
  if (options.source != "<input>")
    n.source_files.push_back(options.source);
  return n;
}

Netlist parse_netlist_files(const std::vector<std::string>& paths, const std::string& top)
{
  if (paths.empty())
    throw UsageError("no netlist files given");
  NetlistParser parser(paths.front());
  for (const auto& p : paths) {
    parser.set_source(p);
    parser.feed(read_file(p));
  }
  Netlist n = parser.finish(top);
  n.source_files = paths;
  return n;
}

namespace {

std::string upper(std::string s)
{
  for (char& c : s)
    c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return s;
}

void emit_card(std::ostringstream& os, const Instance& inst)
{
  os << inst.name;
  for (const auto& t : inst.terminals)
    os << ' ' << t;
  if (!inst.master.empty())
    os << ' ' << inst.master;
  if (inst.kind == DeviceKind::Res || inst.kind == DeviceKind::Cap) {
    if (auto it = inst.params.find("value"); it != inst.params.end())
      os << ' ' << format_number(it->second);
  }
  if (inst.kind == DeviceKind::Diode) {
    if (auto it = inst.params.find("area"); it != inst.params.end())
      os << ' ' << format_number(it->second);
  }
  for (const auto& [k, v] : inst.params) {
    if ((k == "value" && (inst.kind == DeviceKind::Res || inst.kind == DeviceKind::Cap)) ||
        (k == "area" && inst.kind == DeviceKind::Diode))
      continue;
    os << ' ' << upper(k) << '=' << format_number(v);
  }
  os << '\n';
}

} // namespace

std::string emit_netlist(const Netlist& netlist)
{
  std::ostringstream os;
  os << "* paracap netlist\n";
  if (netlist.subckts.empty())
    return os.str();
  const SubcktDef* loose = netlist.implicit_top ? netlist.find(netlist.top) : nullptr;
  for (const auto& def : netlist.subckts) {
    if (&def == loose)
      continue;
    os << "\n.SUBCKT " << def.name;
    for (const auto& p : def.ports)
      os << ' ' << p;
    os << '\n';
    for (const auto& inst : def.instances)
      emit_card(os, inst);
    os << ".ENDS " << def.name << '\n';
  }
  if (loose) {
    os << '\n';
    for (const auto& inst : loose->instances)
      emit_card(os, inst);
  }
  os << "\n.END\n";
  return os.str();
}

} // namespace paracap
