#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "clepcast/engine.hpp"
#include "clepcast/error.hpp"
#include "clepcast/evalharness.hpp"
#include "test_support.hpp"

namespace clepcast {
namespace {

using testing::fips;
using testing::make_panel;

Panel linear_panel(std::size_t days = 30) {
  std::vector<std::int64_t> a, b;
  for (std::size_t t = 0; t < days; ++t) {
    a.push_back(5 + 3 * static_cast<std::int64_t>(t));
    b.push_back(20 + 7 * static_cast<std::int64_t>(t));
  }
  return make_panel({{"01001", a}, {"01003", b}}, 18322, {{"01001", "01003"}});
}

TEST(Engine, FreshAdvanceStartsAtFirstFullWindow) {
  const Panel p = linear_panel();
  EnsembleState s(Horizon(5), EnsembleConfig{});
  const auto reports = advance(s, p, 10, FitConfig{});
  ASSERT_EQ(reports.size(), 5u);
  EXPECT_EQ(*s.first_issue, p.day_at(6));
  EXPECT_EQ(*s.last_issue, p.day_at(10));
  EXPECT_TRUE(reports.front().scored.empty());
  ASSERT_EQ(reports.back().scored.size(), 0u);
}

TEST(Engine, ScoresBeforeIssuingOnTargetDay) {
  const Panel p = linear_panel();
  EnsembleState s(Horizon(3), EnsembleConfig{});
  advance(s, p, 8, FitConfig{});
  const auto r = step(s, p, 9, FitConfig{});
  ASSERT_EQ(r.scored.size(), 2u);
  for (const auto& o : r.scored) {
    EXPECT_EQ(o.issued, p.day_at(6));
    EXPECT_EQ(o.target, p.day_at(9));
    EXPECT_EQ(o.actual, static_cast<double>(p.deaths(o.county, 9)));
  }
  EXPECT_EQ(*s.last_scored_issue, p.day_at(6));
  EXPECT_EQ(r.issued.size(), 2u);
  EXPECT_EQ(s.find(fips("01001"))->pending.size(), 3u);
}

TEST(Engine, RejectsReplayingADay) {
  const Panel p = linear_panel();
  EnsembleState s(Horizon(3), EnsembleConfig{});
  advance(s, p, 8, FitConfig{});
  try {
    step(s, p, 8, FitConfig{});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::InvalidArgument);
  }
  EXPECT_THROW(advance(s, p, p.num_days(), FitConfig{}), Error);
}

TEST(Engine, ResumedAdvanceEqualsSingleAdvance) {
  const Panel p = linear_panel();
  EnsembleState a(Horizon(5), EnsembleConfig{});
  EnsembleState b(Horizon(5), EnsembleConfig{});
  advance(a, p, 25, FitConfig{});
  advance(b, p, 12, FitConfig{});
  advance(b, p, 25, FitConfig{});
  for (const auto& [c, ce] : a.counties) {
    EXPECT_EQ(ce.weights.weights, b.find(c)->weights.weights);
    EXPECT_EQ(ce.weights.discounted_loss, b.find(c)->weights.discounted_loss);
  }
}

TEST(Engine, LinearRegimeFavoursSeparateLinear) {
  const Panel p = linear_panel();
  EnsembleState s(Horizon(5), EnsembleConfig{});
  advance(s, p, 15, FitConfig{});
  for (const auto& [c, ce] : s.counties) {
    EXPECT_GT(ce.weights.weights[0], ce.weights.weights[1]) << c.fips();
    EXPECT_NEAR(ce.weights.discounted_loss[0], 0.0, 1e-9);
  }
}

TEST(Engine, WeightsSumToOne) {
  SynthSpec spec;
  spec.regime = Regime::Switching;
  spec.counties = 20;
  spec.days = 40;
  spec.sigma = 0.05;
  const Panel p = generate_synthetic(spec);
  EnsembleState s(Horizon(7), EnsembleConfig{0.8, 3.0, 2});
  for (const auto& r : advance(s, p, 32, FitConfig{})) EXPECT_LE(r.max_weight_sum_error, 1e-12);
}

TEST(Engine, ClepForecastIsConvexAndWithinInterval) {
  SynthSpec spec;
  spec.regime = Regime::Logistic;
  spec.counties = 15;
  spec.days = 40;
  spec.sigma = 0.05;
  const Panel p = generate_synthetic(spec);
  EnsembleState s(Horizon(5), EnsembleConfig{});
  advance(s, p, 30, FitConfig{});
  for (const auto& [c, f] : clep_predict(p, p.day_at(30), s, FitConfig{})) {
    const auto [lo, hi] = std::minmax_element(f.baselines.begin(), f.baselines.end());
    EXPECT_GE(f.value, *lo);
    EXPECT_LE(f.value, *hi);
    EXPECT_LE(f.interval.lower, f.value);
    EXPECT_GE(f.interval.upper, f.value);
    EXPECT_GE(f.interval.lower, f.last_observed);
  }
}

TEST(Engine, StaleStateAfterGrace) {
  const Panel p = linear_panel();
  EnsembleState s(Horizon(5), EnsembleConfig{0.5, 1.0, 2});
  advance(s, p, 15, FitConfig{});
  // scored through issue day 10; as_of - 5 - 2 <= 10 is fine up to day 17.
  EXPECT_NO_THROW(clep_predict(p, p.day_at(17), s, FitConfig{}));
  try {
    clep_predict(p, p.day_at(18), s, FitConfig{});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::StaleState);
  }
  EXPECT_THROW(clep_predict(p, p.day_at(0) - 1, s, FitConfig{}), Error);
}

TEST(Engine, FreshStateIsNeverStale) {
  const Panel p = linear_panel();
  const EnsembleState s(Horizon(5), EnsembleConfig{});
  const auto f = clep_predict(p, p.day_at(20), s, FitConfig{});
  for (const auto& [c, v] : f) {
    EXPECT_TRUE(v.interval.provisional);
    EXPECT_DOUBLE_EQ(v.weights[0], 0.2);
  }
}

TEST(Engine, FutureDataDoesNotLeakIntoForecasts) {
  SynthSpec spec;
  spec.regime = Regime::Exponential;
  spec.counties = 8;
  spec.days = 40;
  spec.sigma = 0.05;
  const Panel p = generate_synthetic(spec);
  const std::size_t t = 25;
  const int h = 5;
  EnsembleState s(Horizon(h), EnsembleConfig{});
  advance(s, p, t, FitConfig{});
  const auto base = clep_predict(p, p.day_at(t), s, FitConfig{});

  std::mt19937_64 rng(77);
  std::map<CountyId, DaySeries> mutated;
  for (const auto& [c, series] : p.series()) {
    DaySeries m = series;
    for (std::size_t d = t + 1; d < m.cum_deaths.size(); ++d) m.cum_deaths[d] = m.cum_deaths[d - 1] + rng() % 1000;
    mutated.emplace(c, std::move(m));
  }
  const Panel q(p.start_date(), p.num_days(), std::move(mutated), p.static_features(), p.adjacency());
  EnsembleState s2(Horizon(h), EnsembleConfig{});
  advance(s2, q, t, FitConfig{});
  const auto other = clep_predict(q, q.day_at(t), s2, FitConfig{});
  for (const auto& [c, f] : base) {
    EXPECT_EQ(f.value, other.at(c).value);
    EXPECT_EQ(f.interval.upper, other.at(c).interval.upper);
  }
}

TEST(EnsembleStateCtor, RejectsDuplicatesAndEmpty) {
  EXPECT_THROW(EnsembleState(Horizon(5), EnsembleConfig{}, {}), Error);
  EXPECT_THROW(EnsembleState(Horizon(5), EnsembleConfig{}, {PredictorId::SeparateExp, PredictorId::SeparateExp}), Error);
  EnsembleState two(Horizon(5), EnsembleConfig{}, {PredictorId::SeparateLinear, PredictorId::NeighborExp});
  const Panel p = linear_panel();
  advance(two, p, 12, FitConfig{});
  EXPECT_EQ(two.find(fips("01001"))->weights.size(), 2u);
}

}  // namespace
}  // namespace clepcast
