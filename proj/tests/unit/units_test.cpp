#include "paracap/error.hpp"
#include "paracap/flatten.hpp"
#include "paracap/units.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <limits>

using namespace paracap;

TEST(SpiceNumber, EngineeringSuffixes)
{
  EXPECT_DOUBLE_EQ(*parse_spice_number("1k"), 1e3);
  EXPECT_DOUBLE_EQ(*parse_spice_number("2.5meg"), 2.5e6);
  EXPECT_DOUBLE_EQ(*parse_spice_number("2.5MEG"), 2.5e6);
  EXPECT_DOUBLE_EQ(*parse_spice_number("3m"), 3e-3);
  EXPECT_DOUBLE_EQ(*parse_spice_number("0.4u"), 0.4e-6);
  EXPECT_DOUBLE_EQ(*parse_spice_number("50n"), 50e-9);
  EXPECT_DOUBLE_EQ(*parse_spice_number("0.01p"), 0.01e-12);
  EXPECT_DOUBLE_EQ(*parse_spice_number("1.5f"), 1.5e-15);
  EXPECT_DOUBLE_EQ(*parse_spice_number("7a"), 7e-18);
  EXPECT_DOUBLE_EQ(*parse_spice_number("1g"), 1e9);
  EXPECT_DOUBLE_EQ(*parse_spice_number("2t"), 2e12);
  EXPECT_DOUBLE_EQ(*parse_spice_number("1e-14"), 1e-14);
  EXPECT_DOUBLE_EQ(*parse_spice_number("-4.5"), -4.5);
}

TEST(SpiceNumber, TrailingUnitLettersIgnored)
{
  EXPECT_DOUBLE_EQ(*parse_spice_number("1.5FF"), 1.5e-15);
  EXPECT_DOUBLE_EQ(*parse_spice_number("10pF"), 10e-12);
  EXPECT_DOUBLE_EQ(*parse_spice_number("5ohm"), 5.0);
}

TEST(SpiceNumber, RejectsNonNumbers)
{
  EXPECT_FALSE(parse_spice_number("nch").has_value());
  EXPECT_FALSE(parse_spice_number("").has_value());
  EXPECT_FALSE(parse_spice_number("w=1u").has_value());
}

TEST(FormatNumber, RoundTripsExactly)
{
  const double values[] = {1e-15, 0.1, 1.0 / 3.0, 2.5e-16, 123456.789, 6.02214076e23,
                           std::numeric_limits<double>::denorm_min(), 1e300, -7.25e-18};
  for (double v : values) {
    const auto back = parse_spice_number(format_number(v));
    ASSERT_TRUE(back.has_value()) << format_number(v);
    EXPECT_EQ(*back, v) << format_number(v);
  }
}

TEST(CapUnits, FemtofaradFormReadsBackAsFarads)
{
  EXPECT_EQ(cap_unit_from_name("f"), CapUnit::Farad);
  EXPECT_EQ(cap_unit_from_name("ff"), CapUnit::Femtofarad);
  EXPECT_THROW(cap_unit_from_name("pf"), UsageError);
  const double c = 3.7e-15;
  EXPECT_EQ(format_capacitance(c, CapUnit::Femtofarad).back(), 'f');
  EXPECT_NEAR(*parse_spice_number(format_capacitance(c, CapUnit::Femtofarad)), c, 1e-30);
  EXPECT_EQ(*parse_spice_number(format_capacitance(c, CapUnit::Farad)), c);
}

TEST(CanonicalName, NormalisesAndIsIdempotent)
{
  EXPECT_EQ(canonical_name("Top/X1//X2/Net"), "top/x1/x2/net");
  EXPECT_EQ(canonical_name("top.x1.net"), canonical_name(canonical_name("top.x1.net")));
  const char* samples[] = {"A//B/C", "x1.x2.q", "TOP/Bl<3>", "a", "//lead"};
  for (const char* s : samples)
    EXPECT_EQ(canonical_name(canonical_name(s)), canonical_name(s)) << s;
  NameOptions cs;
  cs.case_sensitive = true;
  EXPECT_EQ(canonical_name("Top/Net", cs), "Top/Net");
}

TEST(ErrorCodes, NamesAndValues)
{
  EXPECT_STREQ(error_code_name(ErrorCode::Usage), "E_USAGE");
  EXPECT_STREQ(error_code_name(ErrorCode::Parse), "E_PARSE");
  EXPECT_STREQ(error_code_name(ErrorCode::DataMismatch), "E_DATA");
  EXPECT_STREQ(error_code_name(ErrorCode::Numeric), "E_NUMERIC");
  EXPECT_EQ(static_cast<int>(ErrorCode::Usage), 2);
  EXPECT_EQ(static_cast<int>(ErrorCode::Parse), 3);
  EXPECT_EQ(static_cast<int>(ErrorCode::DataMismatch), 4);
  EXPECT_EQ(static_cast<int>(ErrorCode::Numeric), 5);
}
