#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "clepcast/clep.hpp"
#include "clepcast/core.hpp"
#include "clepcast/mepi.hpp"
#include "clepcast/predictors.hpp"

namespace clepcast {

struct LossTriple {
  double mae = 0.0;
  double rmse = 0.0;
  double mare = 0.0;  // mean |yhat - y| / (y + 1)
};

LossTriple losses(std::span<const double> predicted, std::span<const double> actual);

// ---------------------------------------------------------------------------
// Synthetic panels

enum class Regime { Linear, Exponential, Logistic, Switching };

std::string_view to_string(Regime regime) noexcept;
Regime regime_from_string(std::string_view text);

struct SynthSpec {
  Regime regime = Regime::Linear;
  std::size_t counties = 10;
  std::size_t days = 60;
  double sigma = 0.0;  // multiplicative log-normal noise on the cumulative level
  std::uint64_t seed = 1;
  Day start = 18322;   // 2020-03-01
  double log_shift = 1.0;

  // Per-county parameter ranges. Linear intercepts/slopes and exponential
  // levels are drawn as integers so noiseless series are exact.
  std::int64_t level_min = 5;
  std::int64_t level_max = 50;
  std::int64_t slope_min = 1;
  std::int64_t slope_max = 10;
  double growth_min = 1.03;
  double growth_max = 1.12;

  void validate() const;
};

/// Synthetic FIPS code for county number `index` (0-based).
CountyId synthetic_county(std::size_t index);

/// Cumulative, non-decreasing integer series per county, ring adjacency and
/// population/density/icu_beds features. Deterministic in the spec.
Panel generate_synthetic(const SynthSpec& spec);

// ---------------------------------------------------------------------------
// Rolling-origin backtest

struct BacktestConfig {
  std::string name = "default";
  FitConfig fit;
  EnsembleConfig ensemble;
};

/// Cartesian product over the given values, everything else from `base`.
std::vector<BacktestConfig> config_grid(std::span<const double> mus, std::span<const double> cs,
                                        std::span<const std::size_t> k_fits, const BacktestConfig& base = {});

struct HorizonScores {
  Horizon horizon{1};
  std::map<std::string, LossTriple> scores;  // "p1".."p5", "clep"
  Coverage coverage;
  std::size_t scored_per_county = 0;
  std::size_t provisional_intervals = 0;
  double max_weight_sum_error = 0.0;
  std::size_t convexity_violations = 0;
};

struct BacktestReport {
  BacktestConfig config;
  Day start = 0;
  Day end = 0;
  std::size_t counties = 0;
  std::size_t warmup_days = 0;  // first admissible start index for the largest horizon
  std::vector<HorizonScores> horizons;
};

/// Smallest start index that leaves kMepiWindow scored forecasts before the
/// first evaluated issue day.
std::size_t required_warmup(const FitConfig& fit, Horizon horizon) noexcept;

/// Replays the online engine from scratch for each horizon and scores the
/// forecasts issued on days [start, end]. Throws InsufficientWarmup when
/// start is too early and DateOutOfRange when end + h leaves the panel.
BacktestReport rolling_backtest(const Panel& panel, Day start, Day end, std::span<const Horizon> horizons,
                                const BacktestConfig& config);

std::vector<BacktestReport> rolling_backtest(const Panel& panel, Day start, Day end,
                                             std::span<const Horizon> horizons,
                                             std::span<const BacktestConfig> configs);

std::string backtest_table(std::span<const BacktestReport> reports);

}  // namespace clepcast
