#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "clepcast/ingest.hpp"
#include "test_support.hpp"

namespace clepcast {
namespace {

using testing::kind_of;

using testing::fips;

SourceDescriptor desc(std::string name, int priority = 0, SourceKind kind = SourceKind::DeathsCases) {
  return SourceDescriptor{std::move(name), "", kind, priority};
}

TEST(LoadCounties, TwoMonotoneCounties) {
  const auto r = parse_counties(
      "fips,date,cum_deaths\n"
      "01001,2020-03-01,0\n01001,2020-03-02,1\n01001,2020-03-03,2\n"
      "01003,2020-03-01,5\n01003,2020-03-02,5\n01003,2020-03-03,7\n",
      desc("a"));
  ASSERT_EQ(r.series.size(), 2u);
  EXPECT_TRUE(r.repairs.empty());
  EXPECT_EQ(r.series[1].series.cum_deaths, (std::vector<std::int64_t>{5, 5, 7}));
  EXPECT_EQ(r.series[0].origin[2].line, 4);
}

TEST(LoadCounties, DipIsRepairedAndLogged) {
  const auto r = parse_counties(
      "fips,date,cum_deaths\n01001,2020-03-01,4\n01001,2020-03-02,3\n01001,2020-03-03,5\n", desc("a"));
  EXPECT_EQ(r.series[0].series.cum_deaths, (std::vector<std::int64_t>{4, 4, 5}));
  ASSERT_EQ(r.repairs.size(), 1u);
  EXPECT_EQ(r.repairs[0].day, parse_date("2020-03-02"));
  EXPECT_EQ(r.repairs[0].old_value, 3);
  EXPECT_EQ(r.repairs[0].new_value, 4);
}

TEST(LoadCounties, BadFips) {
  EXPECT_EQ(kind_of([] { parse_counties("fips,date,cum_deaths\n123,2020-03-01,4\n", desc("a")); }),
            ErrorKind::BadFips);
}

TEST(LoadCounties, SchemaAndParseErrors) {
  EXPECT_EQ(kind_of([] { parse_counties("fips,date,deaths\n01001,2020-03-01,4\n", desc("a")); }),
            ErrorKind::SchemaMismatch);
  EXPECT_EQ(kind_of([] { parse_counties("fips,date,cum_deaths\n01001,2020-03-01,x\n", desc("a")); }),
            ErrorKind::ParseError);
  EXPECT_EQ(kind_of([] { parse_counties("fips,date,cum_deaths\n01001,2020-02-30,1\n", desc("a")); }),
            ErrorKind::ParseError);
  EXPECT_EQ(kind_of([] {
              parse_counties("fips,date,cum_deaths\n01001,2020-03-01,1\n01001,2020-03-01,2\n", desc("a"));
            }),
            ErrorKind::ParseError);
}

TEST(LoadCounties, StrictPolicyRejectsNegative) {
  EXPECT_EQ(kind_of([] {
              parse_counties("fips,date,cum_deaths\n01001,2020-03-01,-1\n", desc("a"), MonotoneFixPolicy::Strict);
            }),
            ErrorKind::NegativeCount);
}

TEST(LoadCounties, InteriorGapForwardFilled) {
  const auto r = parse_counties("fips,date,cum_deaths\n01001,2020-03-01,2\n01001,2020-03-04,6\n", desc("a"));
  EXPECT_EQ(r.series[0].series.cum_deaths, (std::vector<std::int64_t>{2, 2, 2, 6}));
  ASSERT_EQ(r.repairs.size(), 2u);
  EXPECT_EQ(r.repairs[0].kind, RepairKind::ForwardFill);
  EXPECT_EQ(r.series[0].origin[1].line, 0);
}

TEST(LoadCounties, OptionalCasesColumn) {
  const auto r = parse_counties(
      "fips,date,cum_deaths,cum_cases\n01001,2020-03-01,1,10\n01001,2020-03-02,2,9\n", desc("a"));
  ASSERT_TRUE(r.series[0].series.cum_cases);
  EXPECT_EQ(*r.series[0].series.cum_cases, (std::vector<std::int64_t>{10, 10}));
  EXPECT_EQ(r.repairs.at(0).column, "cum_cases");
}

TEST(LoadCounties, FileBackendErrors) {
  SourceDescriptor d{"missing", "/nonexistent/clepcast/deaths.csv", SourceKind::DeathsCases, 0};
  EXPECT_EQ(kind_of([&] { load_counties(d); }), ErrorKind::Io);
  d.path = "https://example.org/deaths.csv";
  EXPECT_EQ(kind_of([&] { load_counties(d); }), ErrorKind::UnsupportedSource);
}

TEST(MergeSources, DisjointCountiesUnion) {
  const auto a = parse_counties("fips,date,cum_deaths\n01001,2020-03-01,1\n", desc("a", 2));
  const auto b = parse_counties("fips,date,cum_deaths\n01003,2020-03-01,2\n", desc("b", 1));
  const auto m = merge_sources(a, b);
  EXPECT_EQ(m.series.size(), 2u);
  EXPECT_TRUE(m.conflicts.empty());
}

TEST(MergeSources, HigherPriorityWinsAndConflictLogged) {
  const auto a = parse_counties("fips,date,cum_deaths\n01001,2020-03-01,10\n", desc("a", 2));
  const auto b = parse_counties("fips,date,cum_deaths\n01001,2020-03-01,12\n", desc("b", 1));
  for (const auto& m : {merge_sources(a, b), merge_sources(b, a)}) {
    ASSERT_EQ(m.series.size(), 1u);
    EXPECT_EQ(m.series[0].series.cum_deaths[0], 10);
    ASSERT_EQ(m.conflicts.size(), 1u);
    EXPECT_EQ(m.conflicts[0].kept_source, "a");
    EXPECT_EQ(m.conflicts[0].dropped, 12);
  }
}

TEST(MergeSources, SetUnionCount) {
  const auto a = parse_counties(
      "fips,date,cum_deaths\n01001,2020-03-01,1\n01003,2020-03-01,1\n01005,2020-03-01,1\n", desc("a", 2));
  const auto b = parse_counties(
      "fips,date,cum_deaths\n01005,2020-03-01,1\n01007,2020-03-01,1\n01009,2020-03-01,1\n", desc("b", 1));
  const auto m = merge_sources(a, b);
  std::set<CountyId> oracle;
  for (const auto* src : {&a, &b}) {
    for (const auto& s : src->series) oracle.insert(s.series.county);
  }
  EXPECT_EQ(m.series.size(), oracle.size());
  EXPECT_EQ(m.series.size(), 5u);
}

TEST(MergeSources, LowerPriorityExtendsCoverage) {
  const auto a = parse_counties("fips,date,cum_deaths\n01001,2020-03-01,3\n01001,2020-03-02,4\n", desc("a", 2));
  const auto b = parse_counties(
      "fips,date,cum_deaths\n01001,2020-03-01,3\n01001,2020-03-02,4\n01001,2020-03-03,6\n", desc("b", 1));
  const auto m = merge_sources(a, b);
  EXPECT_EQ(m.series[0].series.cum_deaths, (std::vector<std::int64_t>{3, 4, 6}));
  EXPECT_EQ(m.series[0].origin[2].source, "b");
}

TEST(MergeSources, UncoveredGapIsCalendarMismatch) {
  const auto a = parse_counties("fips,date,cum_deaths\n01001,2020-03-01,3\n", desc("a", 2));
  const auto b = parse_counties("fips,date,cum_deaths\n01001,2020-03-05,4\n", desc("b", 1));
  EXPECT_EQ(kind_of([&] { merge_sources(a, b); }), ErrorKind::CalendarMismatch);
}

TEST(MergeSources, EqualPrioritiesRejected) {
  const auto a = parse_counties("fips,date,cum_deaths\n01001,2020-03-01,3\n", desc("a", 1));
  const auto b = parse_counties("fips,date,cum_deaths\n01001,2020-03-01,3\n", desc("b", 1));
  EXPECT_EQ(kind_of([&] { merge_sources(a, b); }), ErrorKind::InvalidArgument);
}

TEST(MergeSources, RowOrderDoesNotMatter) {
  std::vector<std::string> rows_a, rows_b;
  std::mt19937_64 rng(11);
  for (int c = 1; c <= 6; ++c) {
    char code[6];
    std::snprintf(code, sizeof code, "01%03d", 2 * c - 1);
    std::int64_t va = 0, vb = 0;
    for (int d = 1; d <= 12; ++d) {
      va += static_cast<std::int64_t>(rng() % 4);
      vb = va + static_cast<std::int64_t>(rng() % 2);
      char date[11];
      std::snprintf(date, sizeof date, "2020-03-%02d", d);
      rows_a.push_back(std::string(code) + "," + date + "," + std::to_string(va) + "\n");
      if (c % 2 == 0 || d > 6) rows_b.push_back(std::string(code) + "," + date + "," + std::to_string(vb) + "\n");
    }
  }
  auto merged = [&](std::vector<std::string> ra, std::vector<std::string> rb) {
    std::string ta = "fips,date,cum_deaths\n", tb = ta;
    for (const auto& r : ra) ta += r;
    for (const auto& r : rb) tb += r;
    return merge_sources(parse_counties(ta, desc("a", 2)), parse_counties(tb, desc("b", 1)));
  };
  const auto base = merged(rows_a, rows_b);
  for (int trial = 0; trial < 10; ++trial) {
    auto ra = rows_a, rb = rows_b;
    std::shuffle(ra.begin(), ra.end(), rng);
    std::shuffle(rb.begin(), rb.end(), rng);
    const auto m = merged(ra, rb);
    ASSERT_EQ(m.series.size(), base.series.size());
    for (std::size_t i = 0; i < m.series.size(); ++i) EXPECT_EQ(m.series[i].series, base.series[i].series);
    ASSERT_EQ(m.conflicts.size(), base.conflicts.size());
  }
}

TEST(BuildPanel, SingleCounty) {
  const auto b = build_panel({DaySeries{fips("01001"), 100, {1, 2}, std::nullopt}}, {}, {});
  EXPECT_EQ(b.panel.county_count(), 1u);
  EXPECT_TRUE(b.warnings.empty());
}

TEST(BuildPanel, OffsetStartsAlignToUnionCalendar) {
  const auto b = build_panel({DaySeries{fips("01001"), 100, {1, 2, 3, 4}, std::nullopt},
                              DaySeries{fips("01003"), 102, {5, 6}, std::nullopt}},
                             {}, {{fips("01001"), fips("01003")}});
  EXPECT_EQ(b.panel.start_date(), 100);
  EXPECT_EQ(b.panel.num_days(), 4u);
  EXPECT_EQ(b.panel.at(fips("01003")).cum_deaths, (std::vector<std::int64_t>{0, 0, 5, 6}));
  const auto zero_fills = std::count_if(b.panel.provenance().begin(), b.panel.provenance().end(),
                                        [](const RepairRecord& r) { return r.kind == RepairKind::ZeroFill; });
  EXPECT_EQ(zero_fills, 2);
}

TEST(BuildPanel, ShortTailIsForwardFilled) {
  const auto b = build_panel({DaySeries{fips("01001"), 100, {1, 2, 3}, std::nullopt},
                              DaySeries{fips("01003"), 100, {5}, std::nullopt}},
                             {}, {});
  EXPECT_EQ(b.panel.at(fips("01003")).cum_deaths, (std::vector<std::int64_t>{5, 5, 5}));
}

TEST(BuildPanel, OneWayAdjacencySymmetrizedWithWarning) {
  const auto b = build_panel({DaySeries{fips("01001"), 100, {1}, std::nullopt},
                              DaySeries{fips("01003"), 100, {1}, std::nullopt}},
                             {}, {{fips("01001"), fips("01003")}});
  EXPECT_TRUE(b.panel.neighbors(fips("01003")).count(fips("01001")));
  ASSERT_EQ(b.warnings.size(), 1u);
  EXPECT_EQ(b.warnings[0].code, "AsymmetricAdjacency");
}

TEST(BuildPanel, OrphansRejected) {
  EXPECT_EQ(kind_of([] {
              build_panel({DaySeries{fips("01001"), 100, {1}, std::nullopt}}, {}, {{fips("01001"), fips("01003")}});
            }),
            ErrorKind::OrphanCounty);
  EXPECT_EQ(kind_of([] {
              build_panel({DaySeries{fips("01001"), 100, {1}, std::nullopt}}, {{fips("01005"), {{"population", 1}}}},
                          {});
            }),
            ErrorKind::OrphanCounty);
}

class Hospitals : public ::testing::Test {
 protected:
  Panel panel = testing::make_panel({{"01001", {1, 2}}, {"01003", {0, 4}}});
};

TEST_F(Hospitals, KnownCounties) {
  const auto h = parse_hospitals("hospital_id,fips,employees,icu_beds\nA,01001,100,4\nB,01003,50,0\n",
                                 desc("h", 0, SourceKind::Hospitals), panel);
  ASSERT_EQ(h.size(), 2u);
  EXPECT_EQ(h[1].employees, 50);
}

TEST_F(Hospitals, Errors) {
  const auto d = desc("h", 0, SourceKind::Hospitals);
  EXPECT_EQ(kind_of([&] { parse_hospitals("hospital_id,fips,employees,icu_beds\nA,01001,0,4\n", d, panel); }),
            ErrorKind::NonPositiveEmployees);
  EXPECT_EQ(kind_of([&] { parse_hospitals("hospital_id,fips,employees,icu_beds\nA,01009,5,4\n", d, panel); }),
            ErrorKind::UnknownCounty);
  EXPECT_EQ(kind_of([&] {
              parse_hospitals("hospital_id,fips,employees,icu_beds\nA,01001,5,4\nA,01003,5,4\n", d, panel);
            }),
            ErrorKind::DuplicateHospital);
}

TEST(Writers, RoundTrip) {
  std::vector<DaySeries> series{DaySeries{fips("01001"), 100, {1, 2, 2}, std::vector<std::int64_t>{3, 4, 5}},
                                DaySeries{fips("72001"), 100, {0, 0, 1}, std::vector<std::int64_t>{0, 1, 1}}};
  const auto back = parse_counties(write_counties_csv(series), desc("a"));
  ASSERT_EQ(back.series.size(), 2u);
  EXPECT_EQ(back.series[0].series, series[0]);
  EXPECT_EQ(back.series[1].series, series[1]);

  const StaticFeatures f{{fips("01001"), {{"population", 12345.0}, {"density", 0.1}}}};
  EXPECT_EQ(parse_static_features(write_static_features_csv(f), desc("f")), f);

  const std::vector<Edge> e{{fips("01001"), fips("72001")}};
  EXPECT_EQ(parse_adjacency(write_adjacency_csv(e), desc("e")), e);

  const Panel p = testing::make_panel({{"01001", {1}}, {"72001", {1}}});
  const std::vector<Hospital> h{{"H,1", fips("01001"), 10, 2}, {"H2", fips("72001"), 3, 0}};
  const auto hb = parse_hospitals(write_hospitals_csv(h), desc("h"), p);
  ASSERT_EQ(hb.size(), 2u);
  EXPECT_EQ(hb[0].id, "H,1");
  EXPECT_EQ(hb[1].employees, 3);
}

}  // namespace
}  // namespace clepcast
