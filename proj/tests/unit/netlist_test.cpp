#include "paracap/error.hpp"
#include "paracap/io.hpp"
#include "paracap/netlist.hpp"
#include "paracap/units.hpp"

#include "testing.hpp"

#include <gtest/gtest.h>

using namespace paracap;

namespace {

Netlist parse_fixture(const std::string& name)
{
  const std::string path = testkit::fixture_dir() + "/netlists/" + name;
  return parse_netlist(read_text_file(path), {path, {}});
}

ErrorCode code_of(const std::string& text)
{
  try {
    parse_netlist(text);
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::Ok;
}

} // namespace

TEST(Netlist, CorpusParsesAndRoundTrips)
{
  const auto files = testkit::fixture_files("netlists", ".sp");
  ASSERT_GE(files.size(), 25u);
  for (const auto& f : files) {
    SCOPED_TRACE(f);
    const Netlist a = parse_netlist(read_text_file(f), {f, {}});
    const Netlist b = parse_netlist(emit_netlist(a));
    EXPECT_TRUE(a.structurally_equal(b));
    EXPECT_EQ(emit_netlist(a), emit_netlist(b));
  }
}

TEST(Netlist, ImplicitTopCollectsLooseCards)
{
  const Netlist n = parse_fixture("01_inverter.sp");
  EXPECT_TRUE(n.implicit_top);
  EXPECT_EQ(n.top, "top");
  const SubcktDef& t = n.top_def();
  ASSERT_EQ(t.instances.size(), 3u);
  EXPECT_EQ(t.instances[0].kind, DeviceKind::Pmos);
  EXPECT_EQ(t.instances[1].kind, DeviceKind::Nmos);
  EXPECT_EQ(t.instances[2].kind, DeviceKind::Cap);
  EXPECT_DOUBLE_EQ(t.instances[2].param("value"), 1e-15);
}

TEST(Netlist, MosCardFields)
{
  const Netlist n = parse_netlist(".SUBCKT top a y vdd\nMP1 y a vdd vdd pch w=0.4u l=50n m=2\n.ENDS\n");
  const Instance& m = n.top_def().instances.at(0);
  EXPECT_EQ(m.name, "MP1");
  EXPECT_EQ(m.kind, DeviceKind::Pmos);
  EXPECT_EQ(m.master, "pch");
  EXPECT_EQ(m.terminals, (std::vector<std::string>{"y", "a", "vdd", "vdd"}));
  EXPECT_DOUBLE_EQ(m.param("w"), 0.4e-6);
  EXPECT_DOUBLE_EQ(m.param("l"), 50e-9);
  EXPECT_DOUBLE_EQ(m.param("m"), 2.0);
}

TEST(Netlist, ContinuationAndComments)
{
  const Netlist n = parse_fixture("08_continuation.sp");
  const SubcktDef* buf = n.find("buf");
  ASSERT_NE(buf, nullptr);
  EXPECT_EQ(buf->ports, (std::vector<std::string>{"a", "y", "vdd", "vss"}));
  ASSERT_EQ(buf->instances.size(), 4u);
  EXPECT_DOUBLE_EQ(buf->instances[0].param("w"), 0.4e-6);
  EXPECT_DOUBLE_EQ(buf->instances[0].param("l"), 0.05e-6);
  EXPECT_EQ(buf->instances[3].master, "nch");
  EXPECT_DOUBLE_EQ(buf->instances[3].param("w"), 0.4e-6);
}

TEST(Netlist, KeywordsAndMastersAreCaseInsensitive)
{
  const Netlist n = parse_fixture("09_case_mixed.sp");
  EXPECT_TRUE(iequals(n.top, "top"));
  ASSERT_NE(n.find("INV"), nullptr);
  EXPECT_EQ(n.top_def().instances.size(), 2u);
}

TEST(Netlist, SlashSeparatedInstance)
{
  const Netlist n = parse_fixture("16_x_slash.sp");
  const SubcktDef& t = n.top_def();
  ASSERT_EQ(t.instances.size(), 2u);
  EXPECT_EQ(t.instances[0].terminals.size(), 4u);
  EXPECT_TRUE(iequals(t.instances[0].master, "inv"));
}

TEST(Netlist, PassiveCards)
{
  const Netlist r = parse_fixture("10_rc_ladder.sp");
  const SubcktDef* lad = r.find("ladder");
  ASSERT_NE(lad, nullptr);
  EXPECT_DOUBLE_EQ(lad->instances[0].param("value"), 1e3);
  EXPECT_DOUBLE_EQ(lad->instances[4].param("value"), 2.2e3);
  EXPECT_DOUBLE_EQ(lad->instances[5].param("value"), 0.01e-12);
  EXPECT_DOUBLE_EQ(lad->instances[6].param("value"), 0.5e6);

  const Netlist m = parse_fixture("12_mom_caps.sp");
  const Instance& c0 = m.find("decap")->instances[0];
  EXPECT_EQ(c0.master, "mom");
  EXPECT_DOUBLE_EQ(c0.param("lr"), 2e-6);
  EXPECT_DOUBLE_EQ(c0.param("nr"), 20.0);

  const Netlist d = parse_fixture("11_diodes.sp");
  const SubcktDef* esd = d.find("esd");
  EXPECT_EQ(esd->instances[0].kind, DeviceKind::Diode);
  EXPECT_EQ(esd->instances[0].master, "dio");
}

TEST(Netlist, DirectivesAreIgnored)
{
  const Netlist n = parse_fixture("23_options_model.sp");
  EXPECT_EQ(n.subckts.size(), 1u);
  EXPECT_EQ(n.top_def().instances.size(), 2u);
}

TEST(Netlist, InfersTopByExpandedSize)
{
  const Netlist n = parse_fixture("26_two_roots.sp");
  EXPECT_EQ(n.top, "big");
  ParseOptions o;
  o.top = "small";
  const Netlist forced =
      parse_netlist(read_text_file(testkit::fixture_dir() + "/netlists/26_two_roots.sp"), o);
  EXPECT_EQ(forced.top, "small");
}

TEST(Netlist, SubcktNetsOrder)
{
  const Netlist n = parse_fixture("02_nand2.sp");
  const SubcktDef* d = n.find("nand2");
  EXPECT_EQ(d->nets(), (std::vector<std::string>{"a", "b", "y", "vdd", "vss", "s1"}));
  EXPECT_EQ(d->device_count(), 4u);
}

TEST(Netlist, ErrorsCarryLocationAndCode)
{
  try {
    parse_netlist(".SUBCKT top a\nQ1 a b c npn\n.ENDS\n", {"bad.sp", {}});
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.code(), ErrorCode::Parse);
    EXPECT_EQ(e.line(), 2u);
    EXPECT_EQ(e.source(), "bad.sp");
  }
  EXPECT_EQ(code_of(".SUBCKT top a\nM1 a b c nch\n.ENDS\n"), ErrorCode::Parse);
  EXPECT_EQ(code_of(".SUBCKT top a\nX1 a missing\n.ENDS\n"), ErrorCode::Parse);
  EXPECT_EQ(code_of(".SUBCKT s a b\n.ENDS\n.SUBCKT top a\nX1 a s\n.ENDS\n"), ErrorCode::Parse);
  EXPECT_EQ(code_of(".SUBCKT a p\nX1 p b\n.ENDS\n.SUBCKT b p\nX1 p a\n.ENDS\n"),
            ErrorCode::Parse);
  EXPECT_EQ(code_of(".SUBCKT top a\nM1 a a a a nch\n"), ErrorCode::Parse);
  EXPECT_EQ(code_of("+ w=1u\n"), ErrorCode::Parse);
  EXPECT_EQ(code_of(".SUBCKT top a\nM1 a a a a nch\nM1 a a a a nch\n.ENDS\n"), ErrorCode::Parse);
}

TEST(Netlist, MultipleFilesFormOneDesign)
{
  const std::string dir = ::testing::TempDir();
  write_file_atomic(dir + "/cells.sp", ".SUBCKT inv a y vdd vss\nMP y a vdd vdd pch\nMN y a vss vss nch\n.ENDS\n");
  write_file_atomic(dir + "/top.sp", ".SUBCKT top a y vdd vss\nX0 a y vdd vss inv\n.ENDS\n");
  const Netlist n = parse_netlist_files({dir + "/top.sp", dir + "/cells.sp"});
  EXPECT_EQ(n.top, "top");
  EXPECT_EQ(n.subckts.size(), 2u);
  EXPECT_EQ(n.source_files.size(), 2u);
}
