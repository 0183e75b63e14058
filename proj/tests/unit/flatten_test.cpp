#include "paracap/flatten.hpp"
#include "paracap/io.hpp"
#include "paracap/netlist.hpp"
#include "paracap/units.hpp"

#include "testing.hpp"

#include <gtest/gtest.h>

#include <set>

using namespace paracap;

namespace {

Netlist parse_fixture(const std::string& name)
{
  const std::string path = testkit::fixture_dir() + "/netlists/" + name;
  return parse_netlist(read_text_file(path), {path, {}});
}

std::set<std::string> canonical_nets(const FlatDesign& f)
{
  std::set<std::string> out;
  for (const auto& n : f.nets)
    out.insert(n.canonical);
  return out;
}

} // namespace

TEST(Flatten, PortsMergeIntoParentNets)
{
  const Netlist n = parse_fixture("02_nand2.sp");
  const FlatDesign f = flatten(n);
  EXPECT_EQ(canonical_nets(f),
            (std::set<std::string>{"top/a", "top/b", "top/y", "top/vdd", "top/vss", "top/x0/s1"}));
  ASSERT_EQ(f.devices.size(), 4u);
  ASSERT_EQ(f.subs.size(), 1u);
  EXPECT_EQ(f.subs[0].level, 1);
  const int s1 = f.find_net("top/x0/s1");
  ASSERT_GE(s1, 0);
  EXPECT_EQ(f.nets[s1].owner_depth, 1);
  EXPECT_EQ(f.nets[s1].local_name, "s1");
  EXPECT_EQ(f.find_net("x0/s1"), s1);
  EXPECT_EQ(f.find_net("TOP/X0/S1"), s1);
  EXPECT_EQ(f.find_net("top/nope"), -1);
}

TEST(Flatten, ArrayCounts)
{
  const FlatDesign f = flatten(parse_fixture("05_sram_array_2x2.sp"));
  EXPECT_EQ(f.nets.size(), 16u);
  EXPECT_EQ(f.devices.size(), 26u);
  EXPECT_EQ(f.subs.size(), 15u);
  int max_level = 0;
  for (const auto& s : f.subs)
    max_level = std::max(max_level, s.level);
  EXPECT_EQ(max_level, 4);
}

TEST(Flatten, GroundIsNotANet)
{
  const FlatDesign f = flatten(parse_fixture("24_ground_node.sp"));
  for (const auto& n : f.nets)
    EXPECT_NE(n.local_name, "0");
  bool saw_ground = false;
  for (const auto& d : f.devices)
    for (int t : d.terminal_nets)
      saw_ground |= t == -1;
  EXPECT_TRUE(saw_ground);
}

TEST(Flatten, IndependentOfDefinitionOrder)
{
  const Netlist a = parse_netlist(".SUBCKT inv a y\nMN y a 0 0 nch\n.ENDS\n"
                                  ".SUBCKT top a y\nXb m y inv\nXa a m inv\n.ENDS\n");
  const Netlist b = parse_netlist(".SUBCKT top a y\nXa a m inv\nXb m y inv\n.ENDS\n"
                                  ".SUBCKT inv a y\nMN y a 0 0 nch\n.ENDS\n");
  const FlatDesign fa = flatten(a);
  const FlatDesign fb = flatten(b);
  ASSERT_EQ(fa.nets.size(), fb.nets.size());
  for (std::size_t i = 0; i < fa.nets.size(); ++i)
    EXPECT_EQ(fa.nets[i].canonical, fb.nets[i].canonical);
  ASSERT_EQ(fa.devices.size(), fb.devices.size());
  for (std::size_t i = 0; i < fa.devices.size(); ++i)
    EXPECT_EQ(fa.devices[i].path, fb.devices[i].path);
}

TEST(Flatten, EveryCorpusDesignFlattens)
{
  for (const auto& f : testkit::fixture_files("netlists", ".sp")) {
    SCOPED_TRACE(f);
    const Netlist n = parse_netlist(read_text_file(f), {f, {}});
    const FlatDesign d = flatten(n);
    EXPECT_EQ(d.net_index.size(), d.nets.size());
    for (std::size_t i = 0; i < d.nets.size(); ++i)
      EXPECT_EQ(d.net_index.at(d.nets[i].canonical), static_cast<int>(i));
  }
}

TEST(Annotate, OneCardPerNetAndStripRestores)
{
  for (const char* name : {"02_nand2.sp", "05_sram_array_2x2.sp", "14_deep_hier.sp", "01_inverter.sp"}) {
    SCOPED_TRACE(name);
    const Netlist n = parse_fixture(name);
    const FlatDesign f = flatten(n);
    std::vector<std::pair<std::string, double>> caps;
    for (std::size_t i = 0; i < f.nets.size(); ++i)
      caps.emplace_back(f.nets[i].canonical, (1.0 + i) * 1e-16);
    const AnnotationResult r = back_annotate(n, caps);
    EXPECT_EQ(r.added, caps.size());
    EXPECT_TRUE(r.unmatched.empty());

    const Netlist re = parse_netlist(emit_netlist(r.netlist));
    EXPECT_TRUE(re.structurally_equal(r.netlist));
    std::size_t cards = 0;
    for (const auto& d : re.subckts)
      for (const auto& inst : d.instances)
        cards += inst.name.starts_with("Cpara") ? 1 : 0;
    EXPECT_EQ(cards, caps.size());
    EXPECT_TRUE(strip_annotations(re, n).structurally_equal(n));
  }
}

TEST(Annotate, ReportsUnmatchedNames)
{
  const Netlist n = parse_fixture("02_nand2.sp");
  const AnnotationResult r = back_annotate(n, {{"top/y", 1e-15}, {"top/ghost", 1e-15}});
  EXPECT_EQ(r.added, 1u);
  ASSERT_EQ(r.unmatched.size(), 1u);
  EXPECT_EQ(r.unmatched[0], "top/ghost");
}

TEST(Annotate, SharedDefinitionUsesHierarchicalReference)
{
  const Netlist n = parse_fixture("05_sram_array_2x2.sp");
  const AnnotationResult r = back_annotate(n, {{"top/xarr/xr0/xc0/q", 2e-16}});
  ASSERT_EQ(r.added, 1u);
  const Instance& card = r.netlist.top_def().instances.back();
  EXPECT_EQ(card.kind, DeviceKind::Cap);
  EXPECT_EQ(card.terminals[1], "0");
  EXPECT_EQ(to_lower(card.terminals[0]), "xarr.xr0.xc0.q");
  EXPECT_DOUBLE_EQ(card.param("value"), 2e-16);
}
