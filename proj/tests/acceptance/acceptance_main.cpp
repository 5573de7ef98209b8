// Acceptance runner: one PASS/FAIL line per criterion, non-zero exit if any fail.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>

#include <json.hpp>

#include "clepcast/engine.hpp"
#include "clepcast/error.hpp"
#include "clepcast/evalharness.hpp"
#include "clepcast/ingest.hpp"
#include "clepcast/pipeline.hpp"
#include "clepcast/serialize.hpp"
#include "clepcast/severity.hpp"

namespace fs = std::filesystem;
using namespace clepcast;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::path(CLEPCAST_TEST_TMP) / "acceptance" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

// 1. Exchangeable multiplicative errors around a cumulative truth: each
// forecast is y(t+5) * exp(sigma * z) with i.i.d. z, intervals from the
// previous five scored forecasts of the same county.
Outcome mepi_coverage() {
  const auto t0 = Clock::now();
  const std::size_t counties = 1000;
  const std::size_t days = 40;
  const int h = 5;
  const double sigma = 0.15;
  std::mt19937_64 rng(20200501);
  std::normal_distribution<double> z(0.0, 1.0);
  std::uniform_real_distribution<double> u(0.0, 1.0);

  std::vector<IssuedInterval> intervals;
  Actuals actuals;
  for (std::size_t c = 0; c < counties; ++c) {
    const CountyId id = synthetic_county(c);
    std::vector<double> truth(days);
    const double level = 20.0 + 200.0 * u(rng);
    const double growth = 1.01 + 0.08 * u(rng);
    for (std::size_t t = 0; t < days; ++t) truth[t] = level * std::pow(growth, static_cast<double>(t));
    for (std::size_t t = 0; t < days; ++t) actuals[{id, 18322 + static_cast<Day>(t)}] = truth[t];

    std::vector<double> forecast(days, 0.0);  // indexed by issue day
    for (std::size_t t = 0; t + h < days; ++t) forecast[t] = truth[t + h] * std::exp(sigma * z(rng));
    for (std::size_t t = 0; t + h < days; ++t) {
      // Forecasts issued at s <= t - h have matured by day t.
      if (t < static_cast<std::size_t>(h) + kMepiWindow - 1) continue;
      std::vector<ScoredPair> hist;
      for (std::size_t s = t - h - (kMepiWindow - 1); s <= t - h; ++s) hist.push_back({forecast[s], truth[s + h]});
      const Interval iv = mepi_interval(hist, forecast[t], truth[t]);
      intervals.push_back({id, 18322 + static_cast<Day>(t), Horizon(h), iv});
    }
  }
  const Coverage cov = coverage(intervals, actuals);
  const double secs = seconds_since(t0);

  // The engine's own intervals on a noisy synthetic backtest, for reference.
  SynthSpec spec;
  spec.regime = Regime::Switching;
  spec.counties = 200;
  spec.days = 40;
  spec.sigma = 0.05;
  spec.seed = 7;
  const Panel p = generate_synthetic(spec);
  const std::vector<Horizon> hs{Horizon(5)};
  const auto rep = rolling_backtest(p, p.day_at(15), p.day_at(34), hs, BacktestConfig{});
  const double engine_cov = rep.horizons[0].coverage.fraction();

  const double f = cov.fraction();
  return {f >= 0.78 && f <= 0.88 && secs < 60.0,
          fmt("coverage %.4f over %zu intervals (target 5/6=0.8333, band [0.78,0.88]), %.2fs; "
              "engine backtest coverage on switching panel %.4f",
              f, cov.total, secs, engine_cov)};
}

// 2. Weight ordering after five scored days on noiseless panels.
Outcome regime_adaptivity() {
  const auto t0 = Clock::now();
  const FitConfig fit{};
  const Horizon h(5);
  const std::size_t through = default_first_issue(fit) + static_cast<std::size_t>(h.days()) + kMepiWindow - 1;
  std::size_t checked = 0;
  std::size_t wrong = 0;
  auto run = [&](const Panel& p, bool linear) {
    EnsembleState s(h, EnsembleConfig{});
    advance(s, p, through, fit);
    for (const auto& [c, ce] : s.counties) {
      ++checked;
      const double w1 = ce.weights.weights[0];
      const double w2 = ce.weights.weights[1];
      if (linear ? !(w1 > w2) : !(w2 > w1)) ++wrong;
    }
  };
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    SynthSpec lin;
    lin.regime = Regime::Linear;
    lin.counties = 50;
    lin.days = through + 1;
    lin.seed = seed;
    run(generate_synthetic(lin), true);

    SynthSpec geo = lin;
    geo.regime = Regime::Exponential;
    geo.growth_min = geo.growth_max = seed % 2 ? 2.0 : 3.0;
    run(generate_synthetic(geo), false);
  }
  const double secs = seconds_since(t0);
  return {wrong == 0 && secs < 5.0,
          fmt("%zu county ensembles checked after 5 scored days, %zu with the wrong ordering, %.2fs", checked, wrong,
              secs)};
}

// 3. CLEP forecast inside the component hull on fuzzed panels and configs.
Outcome convexity() {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::size_t panels = 0;
  std::size_t checked = 0;
  std::size_t violations = 0;
  for (std::uint64_t seed = 1; seed <= 1000; ++seed) {
    SynthSpec spec;
    spec.regime = static_cast<Regime>(seed % 4);
    spec.counties = 3 + seed % 6;
    spec.days = 18 + seed % 10;
    spec.sigma = 0.3 * u(rng);
    spec.seed = seed;
    const Panel p = generate_synthetic(spec);
    FitConfig fit;
    fit.k_fit = 3 + seed % 6;
    EnsembleConfig ens{0.05 + 0.95 * u(rng), 20.0 * u(rng) * u(rng), 2};
    const Horizon h(1 + static_cast<int>(seed % 14));
    EnsembleState s(h, ens);
    for (const auto& r : advance(s, p, p.num_days() - 1, fit)) {
      for (const auto& [c, f] : r.issued) {
        double lo = INFINITY, hi = -INFINITY;
        for (double b : f.baselines) {
          lo = std::min(lo, b);
          hi = std::max(hi, b);
        }
        ++checked;
        if (f.value < lo || f.value > hi) ++violations;
      }
    }
    ++panels;
  }
  return {violations == 0 && panels >= 1000,
          fmt("%zu fuzzed panel/config pairs, %zu county-days, %zu violations", panels, checked, violations)};
}

// 4. Weight normalization after every update in a grid of backtests.
Outcome weight_normalization() {
  const std::vector<double> mus{0.2, 0.6, 1.0};
  const std::vector<double> cs{0.0, 1.0, 25.0};
  const std::vector<std::size_t> ks{5, 9};
  const auto grid = config_grid(mus, cs, ks);
  const std::vector<Horizon> hs{Horizon(5), Horizon(7), Horizon(14)};
  double worst = 0.0;
  std::size_t runs = 0;
  for (int r = 0; r < 4; ++r) {
    SynthSpec spec;
    spec.regime = static_cast<Regime>(r);
    spec.counties = 25;
    spec.days = 60;
    spec.sigma = 0.05 * r;
    spec.seed = 100 + r;
    const Panel p = generate_synthetic(spec);
    const Day start = p.day_at(required_warmup(FitConfig{9}, Horizon(14)));
    for (const auto& rep : rolling_backtest(p, start, p.day_at(45), hs, grid)) {
      for (const auto& h : rep.horizons) worst = std::max(worst, h.max_weight_sum_error);
      ++runs;
    }
  }
  return {worst <= 1e-12, fmt("%zu backtests (x3 horizons), max |sum w - 1| = %.3g", runs, worst)};
}

// Normal-equations oracle in long double on raw sums.
std::pair<long double, long double> oracle_fit(const std::vector<double>& y) {
  long double n = 0, sx = 0, sxx = 0, sy = 0, sxy = 0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const long double x = i;
    n += 1;
    sx += x;
    sxx += x * x;
    sy += y[i];
    sxy += x * y[i];
  }
  const long double det = n * sxx - sx * sx;
  return {(n * sxy - sx * sy) / det, (sy * sxx - sx * sxy) / det};
}

// 5. Exact recovery and oracle agreement.
Outcome exact_recovery() {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> a(0.0, 500.0);
  std::uniform_real_distribution<double> b(0.0, 50.0);
  std::uniform_real_distribution<double> r(1.0, 1.3);
  std::uniform_int_distribution<int> len(3, 21);
  double rec_err = 0.0;
  double oracle_err = 0.0;
  for (int t = 0; t < 2000; ++t) {
    const int k = len(rng);
    const double a0 = a(rng), b0 = b(rng);
    std::vector<double> y(static_cast<std::size_t>(k));
    for (int i = 0; i < k; ++i) y[static_cast<std::size_t>(i)] = a0 + b0 * i;
    const LinearFit lf = fit_linear(y);
    rec_err = std::max({rec_err, std::abs(lf.slope - b0), std::abs(lf.intercept - a0)});
    const auto [os, oi] = oracle_fit(y);
    oracle_err = std::max({oracle_err, std::abs(lf.slope - static_cast<double>(os)),
                           std::abs(lf.intercept - static_cast<double>(oi))});

    const double eps = 1.0;
    const double level = 1.0 + a(rng), rate = r(rng);
    std::vector<double> g(static_cast<std::size_t>(k));
    for (int i = 0; i < k; ++i) g[static_cast<std::size_t>(i)] = level * std::pow(rate, i) - eps;
    const ExpFit ef = fit_exponential(g, eps);
    rec_err = std::max({rec_err, std::abs(ef.growth_rate - std::log(rate)), std::abs(ef.level - std::log(level))});
    std::vector<double> lg;
    for (double v : g) lg.push_back(std::log(v + eps));
    const auto [gs, gi] = oracle_fit(lg);
    oracle_err = std::max({oracle_err, std::abs(ef.growth_rate - static_cast<double>(gs)),
                           std::abs(ef.level - static_cast<double>(gi))});
  }
  return {rec_err <= 1e-8 && oracle_err <= 1e-10,
          fmt("4000 fits: max recovery error %.3g (tol 1e-8), max oracle disagreement %.3g (tol 1e-10)", rec_err,
              oracle_err)};
}

// 6. Imputed hospital values sum to the county value.
Outcome conservation() {
  double worst = 0.0;
  std::size_t cases = 0;
  std::mt19937_64 rng(6);
  std::uniform_int_distribution<std::int64_t> emp(1, 20000);
  std::uniform_real_distribution<double> val(0.0, 1e7);
  for (int t = 0; t < 20000; ++t) {
    std::vector<std::int64_t> e(1 + static_cast<std::size_t>(t % 25));
    for (auto& x : e) x = emp(rng);
    const double total = t % 50 == 0 ? 0.0 : val(rng);
    const auto v = impute_hospital(total, e);
    double s = 0.0;
    for (double x : v) s += x;
    worst = std::max(worst, std::abs(s - total) / std::max(total, 1e-300));
    if (total == 0.0) worst = std::max(worst, std::abs(s));
    ++cases;
  }

  // Sample fixture through the full assessment path.
  const fs::path dir = fresh_dir("conservation");
  write_sample_dataset(dir, default_sample_spec());
  const RunConfig cfg = load_run_config(dir / "sample.ini");
  const Panel panel = cmd_ingest(cfg).panel;
  const auto hospitals = load_hospitals(cfg.sources_of(SourceKind::Hospitals).front(), panel);
  std::map<CountyId, double> current, predicted;
  for (const auto& c : panel.counties()) {
    current[c] = static_cast<double>(panel.deaths(c, panel.num_days() - 1));
    predicted[c] = current[c] * 1.37 + 0.5;
  }
  const auto a = assess_hospitals(hospitals, current, predicted);
  std::map<CountyId, std::pair<double, double>> sums;
  for (const auto& r : a.records) {
    sums[r.county].first += r.current_imputed;
    sums[r.county].second += r.predicted_imputed;
  }
  for (const auto& [c, s] : sums) {
    worst = std::max(worst, std::abs(s.first - current[c]) / std::max(current[c], 1e-300) * (current[c] > 0));
    worst = std::max(worst, std::abs(s.second - predicted[c]) / predicted[c]);
    ++cases;
  }
  return {worst <= 1e-9, fmt("%zu fuzz and fixture cases, max relative error %.3g", cases, worst)};
}

// 7. validate_cumulative is idempotent and monotone.
Outcome cleaning_idempotence() {
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<int> len(1, 60);
  std::uniform_int_distribution<std::int64_t> step(-40, 60);
  std::size_t bad = 0;
  for (int t = 0; t < 10000; ++t) {
    std::vector<std::int64_t> raw(static_cast<std::size_t>(len(rng)));
    std::int64_t v = step(rng);
    for (auto& x : raw) {
      v += step(rng);
      x = v;
    }
    const auto once = validate_cumulative(raw).values;
    const auto twice = validate_cumulative(once).values;
    bool ok = once == twice;
    for (std::size_t i = 0; i < once.size(); ++i) ok &= once[i] >= 0 && (i == 0 || once[i] >= once[i - 1]);
    if (!ok) ++bad;
  }
  return {bad == 0, fmt("10000 fuzzed sequences, %zu failures", bad)};
}

// 8. Data after t + h cannot change the forecast issued at t.
Outcome no_leakage() {
  std::size_t changed = 0;
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    std::mt19937_64 rng(seed * 7919);
    SynthSpec spec;
    spec.regime = static_cast<Regime>(seed % 4);
    spec.counties = 6;
    spec.days = 45;
    spec.sigma = 0.1;
    spec.seed = seed;
    const Panel p = generate_synthetic(spec);
    const FitConfig fit{};
    const int h = std::vector<int>{5, 7, 14}[seed % 3];
    std::uniform_int_distribution<std::size_t> pick(fit.k_fit, p.num_days() - 1 - static_cast<std::size_t>(h));
    const std::size_t t = pick(rng);

    auto forecast_at = [&](const Panel& panel) {
      EnsembleState s(Horizon(h), EnsembleConfig{});
      advance(s, panel, t, fit);
      return clep_predict(panel, panel.day_at(t), s, fit);
    };
    const auto base = forecast_at(p);

    std::map<CountyId, DaySeries> mutated;
    std::uniform_int_distribution<std::int64_t> bump(0, 5000);
    for (const auto& [c, s] : p.series()) {
      DaySeries m = s;
      for (std::size_t d = t + static_cast<std::size_t>(h) + 1; d < m.cum_deaths.size(); ++d) {
        m.cum_deaths[d] = m.cum_deaths[d - 1] + bump(rng);
      }
      mutated.emplace(c, std::move(m));
    }
    const Panel q(p.start_date(), p.num_days(), std::move(mutated), p.static_features(), p.adjacency());
    const auto other = forecast_at(q);
    for (const auto& [c, f] : base) {
      const auto& g = other.at(c);
      if (f.value != g.value || f.baselines != g.baselines || f.interval.lower != g.interval.lower ||
          f.interval.upper != g.interval.upper || f.weights != g.weights) {
        ++changed;
      }
    }
  }
  return {changed == 0, fmt("100 seeded mutation cases, %zu county forecasts changed", changed)};
}

fs::path copy_sample(const std::string& name) {
  const fs::path dir = fresh_dir(name);
  for (const auto& e : fs::directory_iterator(CLEPCAST_SAMPLE_DIR)) {
    if (e.is_regular_file()) fs::copy_file(e.path(), dir / e.path().filename());
  }
  return dir;
}

// 9. Bundled sample end to end.
Outcome end_to_end() {
  const fs::path dir = copy_sample("e2e");
  RunConfig cfg = load_run_config(dir / "sample.ini");
  cfg.horizons = {Horizon(5), Horizon(7), Horizon(14)};
  const auto t0 = Clock::now();
  const Panel panel = cmd_ingest(cfg).panel;
  cmd_forecast(cfg, std::nullopt);
  const auto sev = cmd_severity(cfg, std::nullopt);
  const auto geo = cmd_export(cfg);
  const double secs = seconds_since(t0);

  std::vector<std::string> problems;
  const std::size_t hospitals_in_file = [&] {
    std::size_t lines = 0;
    std::istringstream in(slurp(cfg.sources_of(SourceKind::Hospitals).front().path));
    for (std::string l; std::getline(in, l);) lines += !l.empty();
    return lines - 1;
  }();
  const auto rows = parse_severity_csv(slurp(cfg.output_dir / artifact::kSeverityCsv));
  std::set<std::string> ids;
  for (const auto& r : rows) {
    if (!ids.insert(r.hospital_id).second) problems.push_back("duplicate hospital " + r.hospital_id);
  }
  std::set<SeverityLevel> seen;
  for (const auto& r : sev.records) seen.insert(r.level);
  if (rows.size() != hospitals_in_file || sev.records.size() != hospitals_in_file) {
    problems.push_back(fmt("%zu severity rows for %zu hospitals", rows.size(), hospitals_in_file));
  }

  const auto forecasts = parse_forecasts_csv(slurp(cfg.output_dir / artifact::kForecastsCsv));
  std::set<int> horizons;
  for (const auto& f : forecasts) horizons.insert(f.horizon);
  if (horizons != std::set<int>{5, 7, 14}) problems.push_back("forecasts.csv lacks a horizon");
  std::map<std::string, const ForecastRow*> clep5;
  for (const auto& f : forecasts) {
    if (f.horizon == 5 && f.predictor == "clep") clep5[f.county.fips()] = &f;
  }
  std::map<std::string, SeverityLevel> worst;
  for (const auto& r : rows) {
    auto [it, ins] = worst.emplace(r.county.fips(), r.level);
    if (!ins && r.level > it->second) it->second = r.level;
  }
  const auto doc = nlohmann::json::parse(slurp(cfg.output_dir / artifact::kMap));
  std::size_t matched = 0;
  for (const auto& feat : doc["features"]) {
    const auto& p = feat["properties"];
    const std::string f = p["fips"];
    auto it = clep5.find(f);
    if (it == clep5.end()) {
      problems.push_back("feature " + f + " has no forecast row");
      continue;
    }
    const ForecastRow& r = *it->second;
    const bool level_ok = worst.count(f) ? p["level"] == std::string(to_string(worst[f])) : p["level"].is_null();
    if (p["clep"].get<double>() != r.value || p["lower"].get<double>() != *r.lower ||
        p["upper"].get<double>() != *r.upper || !level_ok) {
      problems.push_back("feature " + f + " disagrees with forecasts.csv");
    }
    ++matched;
  }
  if (matched != panel.county_count() || geo.features != matched) {
    problems.push_back(fmt("%zu of %zu counties in the map", matched, panel.county_count()));
  }

  const bool ok = problems.empty() && secs < 10.0 && panel.county_count() == 50 && panel.num_days() == 60;
  std::string detail = fmt("%zu counties x %zu days, %zu hospitals, %zu distinct levels, %zu map features, %.2fs",
                           panel.county_count(), panel.num_days(), rows.size(), seen.size(), matched, secs);
  for (std::size_t i = 0; i < problems.size() && i < 3; ++i) detail += "; " + problems[i];
  return {ok, detail};
}

// 10. Reruns are bit-identical.
Outcome determinism() {
  std::vector<std::string> diffs;
  const fs::path dir = copy_sample("determinism");
  const RunConfig cfg = load_run_config(dir / "sample.ini");
  cmd_ingest(cfg);
  cmd_forecast(cfg, std::nullopt);
  const std::string csv1 = slurp(cfg.output_dir / artifact::kForecastsCsv);
  const std::string json1 = slurp(cfg.output_dir / artifact::kForecastsJson);
  const std::string state1 = slurp(cfg.output_dir / artifact::kEnsembleState);
  cmd_forecast(cfg, std::nullopt);
  if (slurp(cfg.output_dir / artifact::kForecastsCsv) != csv1) diffs.push_back("forecasts.csv on warm rerun");
  if (slurp(cfg.output_dir / artifact::kForecastsJson) != json1) diffs.push_back("forecasts.json on warm rerun");
  fs::remove(cfg.output_dir / artifact::kEnsembleState);
  cmd_forecast(cfg, std::nullopt);
  if (slurp(cfg.output_dir / artifact::kForecastsCsv) != csv1) diffs.push_back("forecasts.csv on cold rerun");
  if (slurp(cfg.output_dir / artifact::kEnsembleState) != state1) diffs.push_back("ensemble_state.json");

  cmd_backtest(cfg, std::nullopt, std::nullopt);
  const std::string bt1 = slurp(cfg.output_dir / artifact::kBacktestJson);
  cmd_backtest(cfg, std::nullopt, std::nullopt);
  if (slurp(cfg.output_dir / artifact::kBacktestJson) != bt1) diffs.push_back("backtest.json");

  SynthSpec spec;
  spec.regime = Regime::Logistic;
  spec.counties = 30;
  spec.days = 50;
  spec.sigma = 0.1;
  spec.seed = 4242;
  const std::vector<Horizon> hs{Horizon(5), Horizon(7)};
  const Panel a = generate_synthetic(spec);
  const Panel b = generate_synthetic(spec);
  const std::vector<BacktestReport> ra{rolling_backtest(a, a.day_at(20), a.day_at(40), hs, BacktestConfig{})};
  const std::vector<BacktestReport> rb{rolling_backtest(b, b.day_at(20), b.day_at(40), hs, BacktestConfig{})};
  if (serialize_backtest(ra) != serialize_backtest(rb)) diffs.push_back("seeded synthetic backtest");

  std::string detail = "forecast warm/cold reruns and seeded backtests compared byte for byte";
  for (const auto& d : diffs) detail += "; differs: " + d;
  return {diffs.empty(), detail};
}

}  // namespace

int main() {
  const std::vector<std::pair<int, std::function<Outcome()>>> criteria{
      {1, mepi_coverage},  {2, regime_adaptivity},    {3, convexity}, {4, weight_normalization},
      {5, exact_recovery}, {6, conservation},         {7, cleaning_idempotence},
      {8, no_leakage},     {9, end_to_end},           {10, determinism}};
  int failures = 0;
  for (const auto& [n, fn] : criteria) {
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failures += o.pass ? 0 : 1;
    std::printf("ACCEPTANCE %d %s: %s\n", n, o.pass ? "PASS" : "FAIL", o.detail.c_str());
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
