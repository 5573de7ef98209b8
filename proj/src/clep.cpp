#include "clepcast/clep.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "clepcast/error.hpp"

namespace clepcast {

void EnsembleConfig::validate() const {
  if (!(mu > 0.0 && mu <= 1.0)) throw Error(ErrorKind::InvalidArgument, "forgetting factor mu must lie in (0, 1]");
  if (!(c >= 0.0) || !std::isfinite(c)) throw Error(ErrorKind::InvalidArgument, "sharpness c must be >= 0");
  if (grace_days < 0) throw Error(ErrorKind::InvalidArgument, "grace_days must be >= 0");
}

double tracking_loss(double forecast, double actual) noexcept {
  return std::abs(forecast - actual) / (actual + 1.0);
}

WeightState WeightState::uniform(std::size_t n) {
  if (n == 0) throw Error(ErrorKind::InvalidArgument, "an ensemble needs at least one predictor");
  return WeightState{std::vector<double>(n, 0.0), std::vector<double>(n, 1.0 / static_cast<double>(n))};
}

std::vector<double> weights_from_losses(std::span<const double> discounted_loss, double c) {
  std::vector<double> w(discounted_loss.size());
  if (w.empty()) return w;
  const double lmin = *std::min_element(discounted_loss.begin(), discounted_loss.end());
  double total = 0.0;
  for (std::size_t m = 0; m < w.size(); ++m) {
    w[m] = std::exp(-c * (discounted_loss[m] - lmin));
    total += w[m];
  }
  for (auto& v : w) v /= total;
  return w;
}

void update_weights(WeightState& state, std::span<const double> losses, const EnsembleConfig& config) {
  if (losses.size() != state.discounted_loss.size()) {
    throw Error(ErrorKind::InvalidArgument, "expected " + std::to_string(state.discounted_loss.size()) +
                                                " losses, got " + std::to_string(losses.size()));
  }
  for (std::size_t m = 0; m < losses.size(); ++m) {
    if (!std::isfinite(losses[m])) {
      throw Error(ErrorKind::NonFiniteLoss, "non-finite loss for predictor slot " + std::to_string(m),
                  static_cast<std::int64_t>(m));
    }
  }
  for (std::size_t m = 0; m < losses.size(); ++m) {
    state.discounted_loss[m] = config.mu * state.discounted_loss[m] + losses[m];
  }
  state.weights = weights_from_losses(state.discounted_loss, config.c);
}

double combine(std::span<const double> weights, std::span<const double> forecasts) {
  if (weights.size() != forecasts.size() || forecasts.empty()) {
    throw Error(ErrorKind::InvalidArgument, "weights and forecasts must be non-empty and of equal length");
  }
  double sum = 0.0;
  for (std::size_t m = 0; m < weights.size(); ++m) sum += weights[m] * forecasts[m];
  const auto [lo, hi] = std::minmax_element(forecasts.begin(), forecasts.end());
  // Rounding in the weighted sum can step a few ulps outside the hull.
  return std::clamp(sum, *lo, *hi);
}

}  // namespace clepcast
