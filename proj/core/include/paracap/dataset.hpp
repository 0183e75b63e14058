#pragma once

#include "paracap/graph.hpp"
#include "paracap/spf.hpp"

#include <nlohmann/json.hpp>

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace paracap {

inline constexpr int kNumClasses = 5;

/// Upper edges of classes 0..3 in farads; class 4 is open above.
inline constexpr std::array<double, 4> kClassUpperEdges = {0.1e-15, 1e-15, 10e-15, 100e-15};

/// Capacitance class over the half-open bins (0.01,0.1], (0.1,1], (1,10],
/// (10,100], (100,inf) fF. Values at or below 0.01 fF fall into class 0
/// (see is_below_range). Throws DataError for c <= 0.
int bin_of(double farads);
bool is_below_range(double farads);

/// Lower and upper edges of a class in fF (class 4 upper edge is the cap).
std::pair<double, double> class_range_ff(int klass, double open_class_cap_ff = 1000.0);

/// Geometric midpoint of a class in fF.
double class_midpoint_ff(int klass, double open_class_cap_ff = 1000.0);

using ClassFreqs = std::array<double, kNumClasses>;

/// f_t = count_t / total. Throws DataError for an empty label set.
ClassFreqs class_freqs(std::span<const int> labels);

/// alpha_t = 1 / f_t for populated classes, 0 otherwise.
std::array<double, kNumClasses> inverse_frequency_weights(const ClassFreqs& freqs);

struct SplitRatios {
  double train = 0.6;
  double val = 0.2;
  double test = 0.2;
};

/// Node indices (into HeteroGraph::nets) of each split, each sorted.
struct SplitMasks {
  std::vector<int> train;
  std::vector<int> val;
  std::vector<int> test;
};

/// Seeded random partition of `nodes`. Stratified by class when any class
/// has at least 5 members; smaller classes share one pooled stratum.
/// Global split sizes follow the largest-remainder rounding of the ratios.
SplitMasks split(std::span<const int> nodes, std::span<const int> klass_of_node,
                 const SplitRatios& ratios, std::uint64_t seed);

struct LabeledDataset {
  HeteroGraph graph;
  /// Per NET node; NaN when unlabeled.
  std::vector<double> ceff;
  /// Per NET node; -1 when unlabeled.
  std::vector<int> klass;
  SplitMasks masks;
  /// Class frequencies over all labeled nets.
  ClassFreqs freqs{};
  SplitRatios ratios;
  std::uint64_t seed = 0;

  std::vector<int> labeled() const;
  std::size_t below_range_count() const;
};

/// Attaches labels to net nodes by canonical name and splits them.
LabeledDataset make_dataset(HeteroGraph graph, const LabelTable& labels,
                            const SplitRatios& ratios = {}, std::uint64_t seed = 0);

/// Copy with the subcircuit partition removed (labels and masks unchanged).
LabeledDataset without_subckt_nodes(const LabeledDataset& ds);

/// Dataset bundle: graph.json, labels.txt, masks.txt, manifest.json.
void save_dataset(const LabeledDataset& ds, const std::string& dir,
                  const nlohmann::json& config_echo = {});
LabeledDataset load_dataset(const std::string& dir);

nlohmann::json class_histogram(const LabeledDataset& ds);

} // namespace paracap
