#pragma once

// Five baseline trend forecasters of cumulative deaths.
//
//   p1 SeparateLinear     per-county OLS line on the last k_fit days
//   p2 SeparateExp        per-county OLS on log(deaths + log_shift)
//   p3 SharedExp          one pooled log-space growth rate (counties with >= 10 deaths),
//                         per-county intercepts
//   p4 DemographicShared  pooled log-space model on time, log population,
//                         density and ICU beds per capita
//   p5 NeighborExp        p2 with log neighbor-sum deaths as an extra regressor
//
// Every forecast is clamped to be at least the county's last observed count.

#include <array>
#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "clepcast/core.hpp"

namespace clepcast {

enum class PredictorId : std::uint8_t {
  SeparateLinear = 0,
  SeparateExp = 1,
  SharedExp = 2,
  DemographicShared = 3,
  NeighborExp = 4,
};

inline constexpr std::size_t kPredictorCount = 5;
inline constexpr std::array<PredictorId, kPredictorCount> kAllPredictors = {
    PredictorId::SeparateLinear, PredictorId::SeparateExp, PredictorId::SharedExp,
    PredictorId::DemographicShared, PredictorId::NeighborExp};

std::string_view tag(PredictorId id) noexcept;   // "p1".."p5"
std::string_view name(PredictorId id) noexcept;  // "SeparateLinear", ...
PredictorId predictor_from_tag(std::string_view tag);

struct FitConfig {
  std::size_t k_fit = 7;
  double log_shift = 1.0;
  std::size_t min_points = 3;

  void validate() const;
};

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  std::size_t window = 0;  // k, the number of positions spanned by the fit

  /// Extrapolated value at step k - 1 + h, before clamping.
  double extrapolate(int h) const noexcept;
};

struct ExpFit {
  double growth_rate = 0.0;
  double level = 0.0;
  double log_shift = 1.0;
  std::size_t window = 0;

  double extrapolate(int h) const noexcept;
};

/// OLS of y_i on i = 0..k-1. Non-finite entries are dropped (positions kept).
LinearFit fit_linear(std::span<const double> y, std::size_t min_points = 2);

/// OLS of log(y_i + log_shift) on i.
ExpFit fit_exponential(std::span<const double> y, double log_shift, std::size_t min_points = 2);

/// max(value, last_observed, 0); non-finite values collapse to last_observed.
double clamp_forecast(double value, double last_observed) noexcept;

struct PointForecast {
  PredictorId predictor;
  CountyId county;
  Day as_of;
  Horizon horizon;
  double value;
};

struct Fallback {
  PredictorId predictor;
  CountyId county;
  std::string reason;
};

struct BaselineForecasts {
  Day as_of = 0;
  Horizon horizon{1};
  std::map<CountyId, std::array<double, kPredictorCount>> values;
  std::vector<Fallback> fallbacks;

  PointForecast at(PredictorId id, const CountyId& county) const;
};

/// Forecasts for every county, using only panel days <= as_of_index.
BaselineForecasts predict_all(const Panel& panel, std::size_t as_of_index, Horizon horizon, const FitConfig& config);

}  // namespace clepcast
