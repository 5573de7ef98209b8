#pragma once

// Maximum absolute relative error prediction intervals.
//
// delta = max_j |yhat_j - y_j| / yhat_j over the five most recent scored
// forecasts at the same horizon; bounds are center * (1 +/- delta) with the
// lower bound never below the last observed cumulative count.

#include <cstddef>
#include <map>
#include <span>
#include <utility>

#include "clepcast/core.hpp"

namespace clepcast {

inline constexpr std::size_t kMepiWindow = 5;

struct ScoredPair {
  double predicted = 0.0;
  double actual = 0.0;
};

struct Interval {
  double center = 0.0;
  double delta = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  bool provisional = false;
};

/// Uses the last kMepiWindow pairs of `history`. Throws InsufficientHistory
/// when fewer exist and NonPositivePrediction when a prediction or the
/// center is not positive.
Interval mepi_interval(std::span<const ScoredPair> history, double center, double last_observed);

/// Cold-start rule: delta = 1, flagged provisional.
Interval provisional_interval(double center, double last_observed);

/// mepi_interval when its preconditions hold, otherwise the cold-start rule.
Interval make_interval(std::span<const ScoredPair> history, double center, double last_observed);

struct IssuedInterval {
  CountyId county;
  Day as_of = 0;
  Horizon horizon{1};
  Interval bounds;

  Day target() const noexcept { return as_of + horizon.days(); }
};

struct Coverage {
  std::size_t covered = 0;
  std::size_t total = 0;

  double fraction() const noexcept {
    return total == 0 ? 0.0 : static_cast<double>(covered) / static_cast<double>(total);
  }
};

using Actuals = std::map<std::pair<CountyId, Day>, double>;

/// Counts intervals with lower <= actual <= upper. Actuals are keyed by
/// (county, target day). Throws MissingActual.
Coverage coverage(std::span<const IssuedInterval> intervals, const Actuals& actuals);

}  // namespace clepcast
