#include "paracap/dataset.hpp"
#include "paracap/error.hpp"
#include "paracap/io.hpp"

#include "testing.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <set>

using namespace paracap;

TEST(Bins, HalfOpenEdges)
{
  EXPECT_EQ(bin_of(0.05e-15), 0);
  EXPECT_EQ(bin_of(0.1e-15), 0);
  EXPECT_EQ(bin_of(0.1000001e-15), 1);
  EXPECT_EQ(bin_of(1e-15), 1);
  EXPECT_EQ(bin_of(5e-15), 2);
  EXPECT_EQ(bin_of(10e-15), 2);
  EXPECT_EQ(bin_of(100e-15), 3);
  EXPECT_EQ(bin_of(101e-15), 4);
  EXPECT_EQ(bin_of(1e-9), 4);
  EXPECT_EQ(bin_of(0.005e-15), 0);
  EXPECT_TRUE(is_below_range(0.005e-15));
  EXPECT_TRUE(is_below_range(0.01e-15));
  EXPECT_FALSE(is_below_range(0.011e-15));
  EXPECT_THROW(bin_of(0.0), DataError);
  EXPECT_THROW(bin_of(-1e-15), DataError);
}

TEST(Bins, MidpointsAreGeometric)
{
  EXPECT_NEAR(class_midpoint_ff(4), std::sqrt(100.0 * 1000.0), 1e-12);
  EXPECT_NEAR(class_midpoint_ff(0), std::sqrt(0.01 * 0.1), 1e-15);
  EXPECT_NEAR(class_midpoint_ff(2), std::sqrt(1.0 * 10.0), 1e-12);
  EXPECT_NEAR(class_midpoint_ff(4, 400.0), 200.0, 1e-12);
  EXPECT_EQ(class_range_ff(3).first, 10.0);
  EXPECT_EQ(class_range_ff(3).second, 100.0);
}

TEST(ClassFreqs, KnownCounts)
{
  std::vector<int> labels;
  const int counts[] = {8, 4, 2, 1, 1};
  for (int t = 0; t < 5; ++t)
    labels.insert(labels.end(), counts[t], t);
  const ClassFreqs f = class_freqs(labels);
  const double want[] = {0.5, 0.25, 0.125, 0.0625, 0.0625};
  for (int t = 0; t < 5; ++t)
    EXPECT_DOUBLE_EQ(f[t], want[t]);
  const auto alpha = inverse_frequency_weights(f);
  for (int t = 0; t < 5; ++t)
    EXPECT_DOUBLE_EQ(alpha[t] * f[t], 1.0);
  EXPECT_THROW(class_freqs(std::vector<int>{}), DataError);
}

TEST(ClassFreqs, AbsentClassGetsZeroWeight)
{
  const auto alpha = inverse_frequency_weights(class_freqs(std::vector<int>{0, 0, 1, 3}));
  EXPECT_DOUBLE_EQ(alpha[0], 2.0);
  EXPECT_DOUBLE_EQ(alpha[2], 0.0);
  EXPECT_DOUBLE_EQ(alpha[4], 0.0);
}

namespace {

void expect_partition(const SplitMasks& m, const std::vector<int>& nodes)
{
  std::vector<int> all;
  for (const auto* v : {&m.train, &m.val, &m.test}) {
    EXPECT_TRUE(std::is_sorted(v->begin(), v->end()));
    all.insert(all.end(), v->begin(), v->end());
  }
  std::sort(all.begin(), all.end());
  std::vector<int> want = nodes;
  std::sort(want.begin(), want.end());
  EXPECT_EQ(all, want);
}

} // namespace

TEST(Split, HundredNetsSixtyTwentyTwenty)
{
  std::vector<int> nodes(100), klass(100);
  for (int i = 0; i < 100; ++i) {
    nodes[i] = i;
    klass[i] = i % 5;
  }
  const SplitMasks m = split(nodes, klass, {}, 3);
  EXPECT_EQ(m.train.size(), 60u);
  EXPECT_EQ(m.val.size(), 20u);
  EXPECT_EQ(m.test.size(), 20u);
  expect_partition(m, nodes);
  for (int t = 0; t < 5; ++t) {
    const auto n = std::count_if(m.train.begin(), m.train.end(), [&](int i) { return klass[i] == t; });
    EXPECT_EQ(n, 12) << "class " << t;
  }
}

TEST(Split, DeterministicAndSeedSensitive)
{
  std::vector<int> nodes(57), klass(57);
  for (int i = 0; i < 57; ++i) {
    nodes[i] = i;
    klass[i] = i < 40 ? 0 : (i < 52 ? 1 : 4);
  }
  const SplitMasks a = split(nodes, klass, {}, 11);
  const SplitMasks b = split(nodes, klass, {}, 11);
  const SplitMasks c = split(nodes, klass, {}, 12);
  EXPECT_EQ(a.train, b.train);
  EXPECT_EQ(a.test, b.test);
  EXPECT_NE(a.train, c.train);
  expect_partition(a, nodes);
  EXPECT_EQ(a.train.size() + a.val.size() + a.test.size(), 57u);
  EXPECT_EQ(a.train.size(), 34u);
  EXPECT_THROW(split(nodes, klass, {0.5, 0.5, 0.5}, 0), UsageError);
}

namespace {

LabeledDataset nand_dataset()
{
  const Netlist n = parse_netlist(read_text_file(testkit::fixture_dir() + "/netlists/21_decoder2to4.sp"));
  HeteroGraph g = featurize(n);
  LabelTable t;
  for (std::size_t i = 0; i < g.nets.size(); ++i)
    if (i % 7 != 3)
      t.entries.emplace_back(g.nets[i].name, std::pow(10.0, -16.5 + 0.17 * static_cast<double>(i)));
  return make_dataset(std::move(g), t, {}, 5);
}

} // namespace

TEST(Dataset, LabelsAttachByName)
{
  const LabeledDataset ds = nand_dataset();
  std::size_t labeled = 0;
  for (std::size_t i = 0; i < ds.klass.size(); ++i) {
    if (i % 7 == 3) {
      EXPECT_EQ(ds.klass[i], -1);
      EXPECT_TRUE(std::isnan(ds.ceff[i]));
    } else {
      ++labeled;
      EXPECT_EQ(ds.klass[i], bin_of(ds.ceff[i]));
    }
  }
  EXPECT_EQ(ds.labeled().size(), labeled);
  EXPECT_EQ(ds.masks.train.size() + ds.masks.val.size() + ds.masks.test.size(), labeled);
  double sum = 0;
  for (double f : ds.freqs)
    sum += f;
  EXPECT_NEAR(sum, 1.0, 1e-12);
}

TEST(Dataset, SaveLoadRoundTrip)
{
  const LabeledDataset ds = nand_dataset();
  const std::string dir = ::testing::TempDir() + "/paracap_ds";
  save_dataset(ds, dir, {{"echo", 1}});
  const LabeledDataset back = load_dataset(dir);
  EXPECT_EQ(back.graph.edges, ds.graph.edges);
  EXPECT_EQ(back.graph.feat_net, ds.graph.feat_net);
  EXPECT_EQ(back.klass, ds.klass);
  EXPECT_EQ(back.masks.train, ds.masks.train);
  EXPECT_EQ(back.masks.val, ds.masks.val);
  EXPECT_EQ(back.masks.test, ds.masks.test);
  for (std::size_t i = 0; i < ds.ceff.size(); ++i) {
    if (std::isnan(ds.ceff[i]))
      EXPECT_TRUE(std::isnan(back.ceff[i]));
    else
      EXPECT_EQ(back.ceff[i], ds.ceff[i]);
  }
  EXPECT_EQ(back.freqs, ds.freqs);
}

TEST(Dataset, WithoutSubcktNodesKeepsLabels)
{
  const LabeledDataset ds = nand_dataset();
  const LabeledDataset d = without_subckt_nodes(ds);
  EXPECT_EQ(d.graph.subs.size(), 0u);
  EXPECT_EQ(d.klass, ds.klass);
  EXPECT_EQ(d.masks.test, ds.masks.test);
}

TEST(Dataset, HistogramCounts)
{
  const LabeledDataset ds = nand_dataset();
  const auto h = class_histogram(ds);
  std::size_t total = 0;
  for (const auto& c : h["counts"])
    total += c.get<std::size_t>();
  EXPECT_EQ(total, ds.labeled().size());
}
