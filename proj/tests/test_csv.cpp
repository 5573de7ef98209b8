#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "clepcast/csv.hpp"
#include "clepcast/error.hpp"

namespace clepcast {
namespace {

TEST(Csv, ParsesQuotesCrlfAndBom) {
  const auto t = csv::parse("\xEF\xBB\xBF" "a,b\r\n\"x,1\",\"say \"\"hi\"\"\"\r\n\r\n3,4\n");
  ASSERT_EQ(t.header, (std::vector<std::string>{"a", "b"}));
  ASSERT_EQ(t.rows.size(), 2u);
  EXPECT_EQ(t.rows[0][0], "x,1");
  EXPECT_EQ(t.rows[0][1], "say \"hi\"");
  EXPECT_EQ(t.rows[1][1], "4");
  EXPECT_EQ(t.lines[0], 2);
  EXPECT_EQ(t.lines[1], 4);
}

TEST(Csv, HeaderMismatchIsSchemaError) {
  const auto t = csv::parse("fips,day,deaths\n");
  try {
    csv::require_header(t, {{"fips", "date", "cum_deaths"}}, "src");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::SchemaMismatch);
  }
}

TEST(Csv, EscapeRoundTrips) {
  for (const std::string s : {"plain", "a,b", "q\"uote", "new\nline"}) {
    const auto t = csv::parse("h\n" + csv::escape(s) + "\n");
    ASSERT_EQ(t.rows.size(), 1u);
    EXPECT_EQ(t.rows[0][0], s);
  }
}

TEST(Csv, FormatDoubleRoundTripsBitExactly) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1e6, 1e6);
  for (int i = 0; i < 5000; ++i) {
    const double v = u(rng) * std::pow(10.0, static_cast<int>(rng() % 20) - 10);
    EXPECT_EQ(csv::parse_double(csv::format_double(v), 1, "v"), v);
  }
  EXPECT_EQ(csv::format_double(18.0), "18");
  EXPECT_EQ(csv::format_double(0.1), "0.1");
}

TEST(Csv, NumberParsingReportsLine) {
  try {
    csv::parse_int("12x", 7, "cum_deaths");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::ParseError);
    EXPECT_EQ(e.index(), 7);
  }
  EXPECT_THROW(csv::parse_double("", 1, "v"), Error);
  EXPECT_THROW(csv::parse_double("nan", 1, "v"), Error);
}

}  // namespace
}  // namespace clepcast
