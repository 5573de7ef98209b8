#include "clepcast/mepi.hpp"

#include <algorithm>
#include <cmath>

namespace clepcast {

Interval mepi_interval(std::span<const ScoredPair> history, double center, double last_observed) {
  if (history.size() < kMepiWindow) {
    throw Error(ErrorKind::InsufficientHistory,
                "need " + std::to_string(kMepiWindow) + " scored forecasts, have " + std::to_string(history.size()),
                static_cast<std::int64_t>(history.size()));
  }
  if (!(center > 0.0)) throw Error(ErrorKind::NonPositivePrediction, "interval center must be positive");
  const auto recent = history.last(kMepiWindow);
  double delta = 0.0;
  for (const auto& p : recent) {
    if (!(p.predicted > 0.0)) {
      throw Error(ErrorKind::NonPositivePrediction, "scored prediction must be positive");
    }
    delta = std::max(delta, std::abs(p.predicted - p.actual) / p.predicted);
  }
  Interval out;
  out.center = center;
  out.delta = delta;
  out.upper = center * (1.0 + delta);
  out.lower = std::max(last_observed, center * (1.0 - delta));
  return out;
}

Interval provisional_interval(double center, double last_observed) {
  Interval out;
  out.center = center;
  out.delta = 1.0;
  out.upper = 2.0 * center;
  out.lower = std::max(last_observed, 0.0);
  out.provisional = true;
  return out;
}

Interval make_interval(std::span<const ScoredPair> history, double center, double last_observed) {
  if (history.size() < kMepiWindow || !(center > 0.0)) return provisional_interval(center, last_observed);
  const auto recent = history.last(kMepiWindow);
  if (std::any_of(recent.begin(), recent.end(), [](const ScoredPair& p) { return !(p.predicted > 0.0); })) {
    return provisional_interval(center, last_observed);
  }
  return mepi_interval(history, center, last_observed);
}

Coverage coverage(std::span<const IssuedInterval> intervals, const Actuals& actuals) {
  Coverage out;
  for (const auto& iv : intervals) {
    auto it = actuals.find({iv.county, iv.target()});
    if (it == actuals.end()) {
      throw Error(ErrorKind::MissingActual,
                  "no actual for " + iv.county.fips() + " on " + format_date(iv.target()));
    }
    ++out.total;
    if (iv.bounds.lower <= it->second && it->second <= iv.bounds.upper) ++out.covered;
  }
  return out;
}

}  // namespace clepcast
