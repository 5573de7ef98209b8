#include "clepcast/evalharness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "clepcast/engine.hpp"

namespace clepcast {

LossTriple losses(std::span<const double> predicted, std::span<const double> actual) {
  if (predicted.size() != actual.size()) {
    throw Error(ErrorKind::InvalidArgument, "predicted and actual lengths differ");
  }
  LossTriple out;
  if (predicted.empty()) return out;
  double abs_sum = 0.0;
  double sq_sum = 0.0;
  double rel_sum = 0.0;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    const double e = std::abs(predicted[i] - actual[i]);
    abs_sum += e;
    sq_sum += e * e;
    rel_sum += e / (actual[i] + 1.0);
  }
  const auto n = static_cast<double>(predicted.size());
  out.mae = abs_sum / n;
  out.rmse = std::sqrt(sq_sum / n);
  out.mare = rel_sum / n;
  return out;
}

std::vector<BacktestConfig> config_grid(std::span<const double> mus, std::span<const double> cs,
                                        std::span<const std::size_t> k_fits, const BacktestConfig& base) {
  std::vector<BacktestConfig> out;
  for (double mu : mus) {
    for (double c : cs) {
      for (std::size_t k : k_fits) {
        BacktestConfig cfg = base;
        cfg.ensemble.mu = mu;
        cfg.ensemble.c = c;
        cfg.fit.k_fit = k;
        char name[96];
        std::snprintf(name, sizeof name, "mu=%g,c=%g,k_fit=%zu", mu, c, k);
        cfg.name = name;
        out.push_back(std::move(cfg));
      }
    }
  }
  return out;
}

std::size_t required_warmup(const FitConfig& fit, Horizon horizon) noexcept {
  return default_first_issue(fit) + static_cast<std::size_t>(horizon.days()) + kMepiWindow - 1;
}

BacktestReport rolling_backtest(const Panel& panel, Day start, Day end, std::span<const Horizon> horizons,
                                const BacktestConfig& config) {
  config.fit.validate();
  config.ensemble.validate();
  if (horizons.empty()) throw Error(ErrorKind::InvalidArgument, "backtest needs at least one horizon");
  if (start > end) throw Error(ErrorKind::InvalidArgument, "backtest start is after end");
  const auto start_idx = panel.index_of(start);
  const auto end_idx = panel.index_of(end);
  if (!start_idx || !end_idx) {
    throw Error(ErrorKind::DateOutOfRange, "backtest range " + format_date(start) + ".." + format_date(end) +
                                               " is outside the panel calendar");
  }
  const Horizon max_h = *std::max_element(horizons.begin(), horizons.end());
  if (*end_idx + static_cast<std::size_t>(max_h.days()) >= panel.num_days()) {
    throw Error(ErrorKind::DateOutOfRange, "backtest end " + format_date(end) + " plus horizon " +
                                               std::to_string(max_h.days()) + " runs past the panel end " +
                                               format_date(panel.end_date()));
  }
  const std::size_t warmup = required_warmup(config.fit, max_h);
  if (*start_idx < warmup) {
    throw Error(ErrorKind::InsufficientWarmup, "backtest start " + format_date(start) + " leaves " +
                                                   std::to_string(*start_idx) + " warm-up days, need " +
                                                   std::to_string(warmup),
                static_cast<std::int64_t>(warmup));
  }

  BacktestReport report;
  report.config = config;
  report.start = start;
  report.end = end;
  report.counties = panel.county_count();
  report.warmup_days = warmup;

  for (const Horizon h : horizons) {
    EnsembleState state(h, config.ensemble);
    HorizonScores hs;
    hs.horizon = h;
    hs.scored_per_county = *end_idx - *start_idx + 1;

    std::map<std::string, std::pair<std::vector<double>, std::vector<double>>> series;  // tag -> (pred, actual)
    std::vector<IssuedInterval> intervals;
    Actuals actuals;

    const auto reports = advance(state, panel, *end_idx + static_cast<std::size_t>(h.days()), config.fit);
    for (const auto& step_report : reports) {
      hs.max_weight_sum_error = std::max(hs.max_weight_sum_error, step_report.max_weight_sum_error);
      for (const auto& outcome : step_report.scored) {
        if (outcome.issued < start || outcome.issued > end) continue;
        for (std::size_t m = 0; m < state.predictors.size(); ++m) {
          auto& [pred, act] = series[std::string(tag(state.predictors[m]))];
          pred.push_back(outcome.baselines[m]);
          act.push_back(outcome.actual);
        }
        auto& [pred, act] = series["clep"];
        pred.push_back(outcome.clep);
        act.push_back(outcome.actual);

        const auto [lo, hi] = std::minmax_element(outcome.baselines.begin(), outcome.baselines.end());
        if (outcome.clep < *lo || outcome.clep > *hi) ++hs.convexity_violations;
        if (outcome.interval.provisional) ++hs.provisional_intervals;
        intervals.push_back({outcome.county, outcome.issued, h, outcome.interval});
        actuals[{outcome.county, outcome.target}] = outcome.actual;
      }
    }
    for (const auto& [name, pa] : series) hs.scores[name] = losses(pa.first, pa.second);
    hs.coverage = coverage(intervals, actuals);
    report.horizons.push_back(std::move(hs));
  }
  return report;
}

std::vector<BacktestReport> rolling_backtest(const Panel& panel, Day start, Day end,
                                             std::span<const Horizon> horizons,
                                             std::span<const BacktestConfig> configs) {
  std::vector<BacktestReport> out;
  out.reserve(configs.size());
  for (const auto& cfg : configs) out.push_back(rolling_backtest(panel, start, end, horizons, cfg));
  return out;
}

std::string backtest_table(std::span<const BacktestReport> reports) {
  std::string out;
  char line[256];
  for (const auto& r : reports) {
    std::snprintf(line, sizeof line, "config %s  k_fit=%zu mu=%g c=%g  %s..%s  counties=%zu\n", r.config.name.c_str(),
                  r.config.fit.k_fit, r.config.ensemble.mu, r.config.ensemble.c, format_date(r.start).c_str(),
                  format_date(r.end).c_str(), r.counties);
    out += line;
    for (const auto& hs : r.horizons) {
      std::snprintf(line, sizeof line, "  horizon %2d  coverage %.4f (%zu/%zu)\n", hs.horizon.days(),
                    hs.coverage.fraction(), hs.coverage.covered, hs.coverage.total);
      out += line;
      std::snprintf(line, sizeof line, "    %-10s %14s %14s %10s\n", "predictor", "mae", "rmse", "mare");
      out += line;
      for (const auto& [name, s] : hs.scores) {
        std::snprintf(line, sizeof line, "    %-10s %14.4f %14.4f %10.4f\n", name.c_str(), s.mae, s.rmse, s.mare);
        out += line;
      }
    }
  }
  return out;
}

}  // namespace clepcast
