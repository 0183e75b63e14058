#include "paracap/dataset.hpp"
#include "paracap/error.hpp"
#include "paracap/io.hpp"
#include "paracap/units.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>
#include <unordered_map>

namespace paracap {

int bin_of(double farads)
{
  if (!(farads > 0.0) || !std::isfinite(farads))
    throw DataError("capacitance must be positive and finite to be binned");
  for (int t = 0; t < 4; ++t)
    if (farads <= kClassUpperEdges[static_cast<std::size_t>(t)])
      return t;
  return 4;
}

bool is_below_range(double farads) { return farads <= kBelowRangeFarads; }

std::pair<double, double> class_range_ff(int klass, double open_class_cap_ff)
{
  static constexpr std::array<double, 6> edges = {0.01, 0.1, 1.0, 10.0, 100.0, 0.0};
  if (klass < 0 || klass >= kNumClasses)
    throw DataError("class out of range");
  const double hi = klass == 4 ? open_class_cap_ff : edges[static_cast<std::size_t>(klass + 1)];
  return {edges[static_cast<std::size_t>(klass)], hi};
}

double class_midpoint_ff(int klass, double open_class_cap_ff)
{
  const auto [lo, hi] = class_range_ff(klass, open_class_cap_ff);
  return std::sqrt(lo * hi);
}

ClassFreqs class_freqs(std::span<const int> labels)
{
  ClassFreqs f{};
  std::size_t total = 0;
  for (int t : labels) {
    if (t < 0)
      continue;
    if (t >= kNumClasses)
      throw DataError("class label out of range");
    f[static_cast<std::size_t>(t)] += 1.0;
    ++total;
  }
  if (total == 0)
    throw DataError("class frequencies of an empty label set");
  for (double& x : f)
    x /= static_cast<double>(total);
  return f;
}

std::array<double, kNumClasses> inverse_frequency_weights(const ClassFreqs& freqs)
{
  std::array<double, kNumClasses> a{};
  for (std::size_t t = 0; t < a.size(); ++t)
    a[t] = freqs[t] > 0.0 ? 1.0 / freqs[t] : 0.0;
  return a;
}

namespace {

/// Largest-remainder apportionment of n items to the given ratios.
std::array<std::size_t, 3> apportion(std::size_t n, const std::array<double, 3>& r)
{
  std::array<std::size_t, 3> out{};
  std::array<double, 3> frac{};
  std::size_t used = 0;
  for (std::size_t s = 0; s < 3; ++s) {
    const double exact = r[s] * static_cast<double>(n);
    out[s] = static_cast<std::size_t>(std::floor(exact + 1e-9));
    frac[s] = exact - static_cast<double>(out[s]);
    used += out[s];
  }
  while (used < n) {
    std::size_t best = 0;
    for (std::size_t s = 1; s < 3; ++s)
      if (frac[s] > frac[best])
        best = s;
    ++out[best];
    frac[best] = -1.0;
    ++used;
  }
  return out;
}

void shuffle(std::vector<int>& v, std::mt19937_64& rng)
{
  for (std::size_t i = v.size(); i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng() % i);
    std::swap(v[i - 1], v[j]);
  }
}

} // namespace

SplitMasks split(std::span<const int> nodes, std::span<const int> klass_of_node,
                 const SplitRatios& ratios, std::uint64_t seed)
{
  const std::array<double, 3> r = {ratios.train, ratios.val, ratios.test};
  if (std::abs(r[0] + r[1] + r[2] - 1.0) > 1e-9 || r[0] < 0 || r[1] < 0 || r[2] < 0)
    throw UsageError("split ratios must be non-negative and sum to 1");

  // Strata: one per class with >= 5 members, the rest pooled together.
  std::map<int, std::vector<int>> by_class;
  for (int node : nodes)
    by_class[klass_of_node[static_cast<std::size_t>(node)]].push_back(node);
  bool stratify = false;
  for (const auto& [t, members] : by_class)
    stratify = stratify || members.size() >= 5;

  std::vector<std::vector<int>> strata;
  std::vector<int> pooled;
  for (auto& [t, members] : by_class) {
    if (stratify && members.size() >= 5)
      strata.push_back(members);
    else
      pooled.insert(pooled.end(), members.begin(), members.end());
  }
  if (!pooled.empty())
    strata.push_back(pooled);

  std::mt19937_64 rng(seed);
  for (auto& s : strata)
    shuffle(s, rng);

  // Floors per stratum, then hand out leftovers so global totals match the
  // largest-remainder targets exactly.
  const auto target = apportion(nodes.size(), r);
  std::vector<std::array<std::size_t, 3>> alloc(strata.size());
  std::array<std::size_t, 3> assigned{};
  struct Frac {
    double value;
    std::size_t stratum;
    std::size_t split;
  };
  std::vector<Frac> fracs;
  for (std::size_t k = 0; k < strata.size(); ++k) {
    const double n = static_cast<double>(strata[k].size());
    for (std::size_t s = 0; s < 3; ++s) {
      const double exact = r[s] * n;
      alloc[k][s] = static_cast<std::size_t>(std::floor(exact + 1e-9));
      assigned[s] += alloc[k][s];
      fracs.push_back({exact - static_cast<double>(alloc[k][s]), k, s});
    }
  }
  std::stable_sort(fracs.begin(), fracs.end(),
                   [](const Frac& a, const Frac& b) { return a.value > b.value; });
  auto leftover = [&](std::size_t k) {
    return strata[k].size() - alloc[k][0] - alloc[k][1] - alloc[k][2];
  };
  for (const Frac& f : fracs) {
    if (leftover(f.stratum) > 0 && assigned[f.split] < target[f.split]) {
      ++alloc[f.stratum][f.split];
      ++assigned[f.split];
    }
  }
  for (std::size_t k = 0; k < strata.size(); ++k) {
    for (std::size_t s = 0; s < 3 && leftover(k) > 0; ++s) {
      while (leftover(k) > 0 && assigned[s] < target[s]) {
        ++alloc[k][s];
        ++assigned[s];
      }
    }
  }

  SplitMasks m;
  for (std::size_t k = 0; k < strata.size(); ++k) {
    auto it = strata[k].begin();
    m.train.insert(m.train.end(), it, it + static_cast<long>(alloc[k][0]));
    it += static_cast<long>(alloc[k][0]);
    m.val.insert(m.val.end(), it, it + static_cast<long>(alloc[k][1]));
    it += static_cast<long>(alloc[k][1]);
    m.test.insert(m.test.end(), it, it + static_cast<long>(alloc[k][2]));
  }
  std::sort(m.train.begin(), m.train.end());
  std::sort(m.val.begin(), m.val.end());
  std::sort(m.test.begin(), m.test.end());
  return m;
}

std::vector<int> LabeledDataset::labeled() const
{
  std::vector<int> out;
  for (std::size_t i = 0; i < klass.size(); ++i)
    if (klass[i] >= 0)
      out.push_back(static_cast<int>(i));
  return out;
}

std::size_t LabeledDataset::below_range_count() const
{
  return static_cast<std::size_t>(std::count_if(ceff.begin(), ceff.end(), [](double c) {
    return std::isfinite(c) && is_below_range(c);
  }));
}

LabeledDataset make_dataset(HeteroGraph graph, const LabelTable& labels, const SplitRatios& ratios,
                            std::uint64_t seed)
{
  LabeledDataset ds;
  ds.ratios = ratios;
  ds.seed = seed;
  const std::size_t n = graph.nets.size();
  ds.ceff.assign(n, std::numeric_limits<double>::quiet_NaN());
  ds.klass.assign(n, -1);
  std::unordered_map<std::string, int> index;
  for (std::size_t i = 0; i < n; ++i)
    index.emplace(graph.nets[i].name, static_cast<int>(i));
  for (const auto& [name, c] : labels.entries) {
    auto it = index.find(name);
    if (it == index.end())
      continue;
    ds.ceff[static_cast<std::size_t>(it->second)] = c;
    ds.klass[static_cast<std::size_t>(it->second)] = bin_of(c);
  }
  ds.graph = std::move(graph);
  const auto nodes = ds.labeled();
  if (nodes.empty())
    throw DataError("no schematic net matches the label table");
  ds.freqs = class_freqs(ds.klass);
  ds.masks = split(nodes, ds.klass, ratios, seed);
  return ds;
}

LabeledDataset without_subckt_nodes(const LabeledDataset& ds)
{
  LabeledDataset out = ds;
  out.graph = drop_subckt_nodes(ds.graph);
  return out;
}

nlohmann::json class_histogram(const LabeledDataset& ds)
{
  std::array<std::size_t, kNumClasses> counts{};
  for (int t : ds.klass)
    if (t >= 0)
      ++counts[static_cast<std::size_t>(t)];
  return {{"counts", counts},
          {"freqs", ds.freqs},
          {"below_range_flagged", ds.below_range_count()}};
}

void save_dataset(const LabeledDataset& ds, const std::string& dir,
                  const nlohmann::json& config_echo)
{
  std::filesystem::create_directories(dir);
  write_json_atomic(dir + "/graph.json", graph_to_json(ds.graph));

  LabelTable table;
  std::ostringstream masks;
  masks << "# paracap masks v1: <canonical-net> <train|val|test>\n";
  for (std::size_t i = 0; i < ds.klass.size(); ++i)
    if (ds.klass[i] >= 0)
      table.entries.emplace_back(ds.graph.nets[i].name, ds.ceff[i]);
  auto put = [&](const std::vector<int>& ids, const char* tag) {
    for (int id : ids)
      masks << ds.graph.nets[static_cast<std::size_t>(id)].name << ' ' << tag << '\n';
  };
  put(ds.masks.train, "train");
  put(ds.masks.val, "val");
  put(ds.masks.test, "test");
  write_file_atomic(dir + "/labels.txt", write_label_table(table));
  write_file_atomic(dir + "/masks.txt", masks.str());

  nlohmann::json manifest;
  manifest["format"] = "paracap.dataset";
  manifest["schema_version"] = 1;
  manifest["seed"] = ds.seed;
  manifest["ratios"] = {ds.ratios.train, ds.ratios.val, ds.ratios.test};
  manifest["classes"] = class_histogram(ds);
  manifest["split_sizes"] = {ds.masks.train.size(), ds.masks.val.size(), ds.masks.test.size()};
  manifest["split_mode"] = "transductive";
  manifest["config"] = config_echo;
  write_json_atomic(dir + "/manifest.json", manifest);
}

LabeledDataset load_dataset(const std::string& dir)
{
  const nlohmann::json manifest = read_json_file(dir + "/manifest.json");
  if (manifest.value("format", "") != "paracap.dataset")
    throw DataError("'" + dir + "' is not a paracap dataset bundle");
  LabeledDataset ds;
  ds.graph = graph_from_json(read_json_file(dir + "/graph.json"));
  ds.seed = manifest.at("seed").get<std::uint64_t>();
  const auto r = manifest.at("ratios").get<std::vector<double>>();
  ds.ratios = {r.at(0), r.at(1), r.at(2)};

  const LabelTable table = read_label_table(read_text_file(dir + "/labels.txt"), dir + "/labels.txt");
  const std::size_t n = ds.graph.nets.size();
  ds.ceff.assign(n, std::numeric_limits<double>::quiet_NaN());
  ds.klass.assign(n, -1);
  std::unordered_map<std::string, int> index;
  for (std::size_t i = 0; i < n; ++i)
    index.emplace(ds.graph.nets[i].name, static_cast<int>(i));
  for (const auto& [name, c] : table.entries) {
    auto it = index.find(name);
    if (it == index.end())
      throw DataError("label for unknown net '" + name + "'");
    ds.ceff[static_cast<std::size_t>(it->second)] = c;
    ds.klass[static_cast<std::size_t>(it->second)] = bin_of(c);
  }
  ds.freqs = class_freqs(ds.klass);

  const std::string masks = read_text_file(dir + "/masks.txt");
  std::istringstream in(masks);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#')
      continue;
    std::istringstream ls(line);
    std::string name, tag;
    ls >> name >> tag;
    auto it = index.find(name);
    if (it == index.end() || ds.klass[static_cast<std::size_t>(it->second)] < 0)
      throw DataError("mask entry for unlabeled net '" + name + "'");
    if (tag == "train")
      ds.masks.train.push_back(it->second);
    else if (tag == "val")
      ds.masks.val.push_back(it->second);
    else if (tag == "test")
      ds.masks.test.push_back(it->second);
    else
      throw DataError("unknown mask tag '" + tag + "'");
  }
  std::sort(ds.masks.train.begin(), ds.masks.train.end());
  std::sort(ds.masks.val.begin(), ds.masks.val.end());
  std::sort(ds.masks.test.begin(), ds.masks.test.end());
  return ds;
}

} // namespace paracap
