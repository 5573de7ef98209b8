#pragma once

// Combined Linear and Exponential Predictor: per-county exponential weighting
// of the baseline forecasters by their discounted tracking loss.
//
//   L_m <- mu * L_m + loss_m
//   w_m  = exp(-c * (L_m - min L)) / sum_m' exp(-c * (L_m' - min L))

#include <span>
#include <vector>

namespace clepcast {

struct EnsembleConfig {
  double mu = 0.5;     // forgetting factor, (0, 1]
  double c = 1.0;      // sharpness, >= 0
  int grace_days = 2;  // tolerated staleness before StaleState

  void validate() const;
};

/// |forecast - actual| / (actual + 1)
double tracking_loss(double forecast, double actual) noexcept;

struct WeightState {
  std::vector<double> discounted_loss;
  std::vector<double> weights;

  static WeightState uniform(std::size_t n);
  std::size_t size() const noexcept { return weights.size(); }
};

/// Folds one day's losses (one per registered predictor) into the state.
/// Throws NonFiniteLoss with the offending slot as index.
void update_weights(WeightState& state, std::span<const double> losses, const EnsembleConfig& config);

/// Recomputes weights from discounted losses.
std::vector<double> weights_from_losses(std::span<const double> discounted_loss, double c);

/// Convex combination sum_m w_m * f_m, kept inside [min f, max f].
double combine(std::span<const double> weights, std::span<const double> forecasts);

}  // namespace clepcast
