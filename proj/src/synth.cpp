#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>

#include "clepcast/evalharness.hpp"

namespace clepcast {

namespace {

struct CountyCurve {
  Regime regime;
  double a = 0.0;      // linear intercept / exponential level (shifted)
  double b = 0.0;      // linear slope
  double r = 1.0;      // exponential daily factor
  double k = 0.0;      // logistic capacity
  double rate = 0.0;   // logistic rate
  double t0 = 0.0;     // logistic midpoint
  std::size_t switch_day = 0;
  bool linear_first = true;

  double value(std::size_t t, double eps) const {
    const double td = static_cast<double>(t);
    switch (regime) {
      case Regime::Linear: return a + b * td;
      case Regime::Exponential: return a * std::pow(r, td) - eps;
      case Regime::Logistic: return k / (1.0 + std::exp(-rate * (td - t0)));
      case Regime::Switching: {
        const double ts = static_cast<double>(switch_day);
        if (linear_first) {
          if (t <= switch_day) return a + b * td;
          return (a + b * ts + eps) * std::pow(r, td - ts) - eps;
        }
        if (t <= switch_day) return a * std::pow(r, td) - eps;
        const double at_switch = a * std::pow(r, ts) - eps;
        const double slope = std::max(1.0, a * std::pow(r, ts) * std::log(r));
        return at_switch + slope * (td - ts);
      }
    }
    return 0.0;
  }
};

}  // namespace

std::string_view to_string(Regime regime) noexcept {
  switch (regime) {
    case Regime::Linear: return "linear";
    case Regime::Exponential: return "exponential";
    case Regime::Logistic: return "logistic";
    case Regime::Switching: return "switching";
  }
  return "unknown";
}

Regime regime_from_string(std::string_view text) {
  for (auto r : {Regime::Linear, Regime::Exponential, Regime::Logistic, Regime::Switching}) {
    if (to_string(r) == text) return r;
  }
  throw Error(ErrorKind::InvalidArgument, "unknown regime '" + std::string(text) + "'");
}

void SynthSpec::validate() const {
  if (counties == 0 || days == 0) throw Error(ErrorKind::InvalidArgument, "synthetic panel needs counties and days");
  if (counties > 56 * 999) throw Error(ErrorKind::InvalidArgument, "too many synthetic counties");
  if (!(sigma >= 0.0)) throw Error(ErrorKind::InvalidArgument, "sigma must be >= 0");
  if (!(log_shift > 0.0)) throw Error(ErrorKind::InvalidArgument, "log_shift must be positive");
  if (level_min > level_max || slope_min > slope_max || growth_min > growth_max || level_min < 0 || slope_min < 0 ||
      growth_min < 1.0) {
    throw Error(ErrorKind::InvalidArgument, "invalid synthetic parameter ranges");
  }
}

CountyId synthetic_county(std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%02zu%03zu", 1 + index / 999, 1 + index % 999);
  return CountyId::parse(buf);
}

Panel generate_synthetic(const SynthSpec& spec) {
  spec.validate();
  std::mt19937_64 rng(spec.seed);
  std::uniform_int_distribution<std::int64_t> level(spec.level_min, spec.level_max);
  std::uniform_int_distribution<std::int64_t> slope(spec.slope_min, spec.slope_max);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> noise(0.0, 1.0);

  auto growth = [&] {
    return spec.growth_min == spec.growth_max ? spec.growth_min
                                              : spec.growth_min + (spec.growth_max - spec.growth_min) * unit(rng);
  };
  const std::size_t lo_switch = std::max<std::size_t>(1, spec.days / 3);
  const std::size_t hi_switch = std::max(lo_switch, 2 * spec.days / 3);
  std::uniform_int_distribution<std::size_t> switch_day(lo_switch, hi_switch);

  std::map<CountyId, DaySeries> series;
  std::map<CountyId, FeatureMap> features;
  std::map<CountyId, std::set<CountyId>> adjacency;

  for (std::size_t c = 0; c < spec.counties; ++c) {
    const CountyId id = synthetic_county(c);
    CountyCurve curve{spec.regime};
    curve.a = static_cast<double>(level(rng));
    curve.b = static_cast<double>(slope(rng));
    curve.r = growth();
    curve.k = 200.0 + 1800.0 * unit(rng);
    curve.rate = 0.1 + 0.2 * unit(rng);
    curve.t0 = static_cast<double>(spec.days) * (0.3 + 0.4 * unit(rng));
    curve.switch_day = switch_day(rng);
    curve.linear_first = unit(rng) < 0.5;

    DaySeries s{id, spec.start, std::vector<std::int64_t>(spec.days), std::nullopt};
    double running = 0.0;
    for (std::size_t t = 0; t < spec.days; ++t) {
      double v = curve.value(t, spec.log_shift);
      if (spec.sigma > 0.0) v *= std::exp(spec.sigma * noise(rng));
      running = std::max({running, v, 0.0});
      s.cum_deaths[t] = static_cast<std::int64_t>(std::floor(running));
    }
    series.emplace(id, std::move(s));

    const double population = std::exp(std::log(1e4) + (std::log(1e6) - std::log(1e4)) * unit(rng));
    features[id] = FeatureMap{{"population", std::round(population)},
                              {"density", std::round(10.0 + 2990.0 * unit(rng))},
                              {"icu_beds", std::round(population * (1e-4 + 3e-4 * unit(rng)))}};
  }

  if (spec.counties >= 2) {
    for (std::size_t c = 0; c < spec.counties; ++c) {
      const CountyId a = synthetic_county(c);
      const CountyId b = synthetic_county((c + 1) % spec.counties);
      adjacency[a].insert(b);
      adjacency[b].insert(a);
    }
  }
  return Panel(spec.start, spec.days, std::move(series), std::move(features), std::move(adjacency));
}

}  // namespace clepcast
