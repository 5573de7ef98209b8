#include "clepcast/predictors.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace clepcast {

namespace {

constexpr double kSharedExpMinDeaths = 10.0;
constexpr double kRankThreshold = 1e-9;

double persistence_or(double value, double last) { return std::isfinite(value) ? value : last; }

Eigen::VectorXd least_squares(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod;
  cod.setThreshold(kRankThreshold);
  cod.compute(x);
  return cod.solve(y);
}

struct CountyWindow {
  CountyId county;
  std::vector<double> deaths;  // window ending at as_of
  double last = 0.0;
  bool informative = false;
};

// Column-wise z-scores over counties; missing values take the column mean and
// constant columns collapse to zero.
std::vector<std::array<double, 3>> standardized_demographics(const Panel& panel,
                                                             const std::vector<const CountyWindow*>& rows) {
  std::vector<std::array<std::optional<double>, 3>> raw;
  raw.reserve(rows.size());
  for (const auto* w : rows) {
    std::array<std::optional<double>, 3> r;
    const auto pop = panel.feature(w->county, "population");
    if (pop && *pop > 0) r[0] = std::log(*pop);
    r[1] = panel.feature(w->county, "density");
    const auto beds = panel.feature(w->county, "icu_beds");
    if (beds && pop && *pop > 0) r[2] = *beds / *pop;
    raw.push_back(r);
  }
  std::vector<std::array<double, 3>> out(rows.size(), {0.0, 0.0, 0.0});
  for (std::size_t j = 0; j < 3; ++j) {
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto& r : raw) {
      if (r[j]) {
        sum += *r[j];
        ++n;
      }
    }
    if (n == 0) continue;
    const double mean = sum / static_cast<double>(n);
    double ss = 0.0;
    for (const auto& r : raw) ss += std::pow(r[j].value_or(mean) - mean, 2);
    const double sd = std::sqrt(ss / static_cast<double>(raw.size()));
    if (!(sd > 0.0)) continue;
    for (std::size_t i = 0; i < raw.size(); ++i) out[i][j] = (raw[i][j].value_or(mean) - mean) / sd;
  }
  return out;
}

}  // namespace

std::string_view tag(PredictorId id) noexcept {
  static constexpr std::array<std::string_view, kPredictorCount> kTags = {"p1", "p2", "p3", "p4", "p5"};
  return kTags[static_cast<std::size_t>(id)];
}

std::string_view name(PredictorId id) noexcept {
  static constexpr std::array<std::string_view, kPredictorCount> kNames = {
      "SeparateLinear", "SeparateExp", "SharedExp", "DemographicShared", "NeighborExp"};
  return kNames[static_cast<std::size_t>(id)];
}

PredictorId predictor_from_tag(std::string_view t) {
  for (auto id : kAllPredictors) {
    if (tag(id) == t || name(id) == t) return id;
  }
  throw Error(ErrorKind::InvalidArgument, "unknown predictor '" + std::string(t) + "'");
}

void FitConfig::validate() const {
  if (min_points < 2) throw Error(ErrorKind::InvalidArgument, "min_points must be at least 2");
  if (k_fit < min_points) throw Error(ErrorKind::InvalidArgument, "k_fit must be at least min_points");
  if (!(log_shift > 0.0) || !std::isfinite(log_shift)) {
    throw Error(ErrorKind::InvalidArgument, "log_shift must be a positive finite number");
  }
}

double LinearFit::extrapolate(int h) const noexcept {
  return intercept + slope * (static_cast<double>(window) - 1.0 + h);
}

double ExpFit::extrapolate(int h) const noexcept {
  return std::exp(level + growth_rate * (static_cast<double>(window) - 1.0 + h)) - log_shift;
}

LinearFit fit_linear(std::span<const double> y, std::size_t min_points) {
  std::size_t n = 0;
  double sx = 0.0;
  double sy = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (!std::isfinite(y[i])) continue;
    sx += static_cast<double>(i);
    sy += y[i];
    ++n;
  }
  if (n < std::max<std::size_t>(min_points, 2)) {
    throw Error(ErrorKind::DegenerateWindow,
                "only " + std::to_string(n) + " usable points, need " + std::to_string(std::max<std::size_t>(min_points, 2)),
                static_cast<std::int64_t>(n));
  }
  const double xm = sx / static_cast<double>(n);
  const double ym = sy / static_cast<double>(n);
  double sxx = 0.0;
  double sxy = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (!std::isfinite(y[i])) continue;
    const double dx = static_cast<double>(i) - xm;
    sxx += dx * dx;
    sxy += dx * (y[i] - ym);
  }
  LinearFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = ym - fit.slope * xm;
  fit.window = y.size();
  return fit;
}

ExpFit fit_exponential(std::span<const double> y, double log_shift, std::size_t min_points) {
  if (!(log_shift > 0.0)) throw Error(ErrorKind::InvalidArgument, "log_shift must be positive");
  std::vector<double> logged(y.size());
  std::transform(y.begin(), y.end(), logged.begin(), [&](double v) {
    const double shifted = v + log_shift;
    return shifted > 0.0 ? std::log(shifted) : std::numeric_limits<double>::quiet_NaN();
  });
  const LinearFit lin = fit_linear(logged, min_points);
  return ExpFit{lin.slope, lin.intercept, log_shift, y.size()};
}

double clamp_forecast(double value, double last_observed) noexcept {
  const double floor = std::max(last_observed, 0.0);
  if (!std::isfinite(value)) return floor;
  return std::max(value, floor);
}

PointForecast BaselineForecasts::at(PredictorId id, const CountyId& county) const {
  auto it = values.find(county);
  if (it == values.end()) throw Error(ErrorKind::UnknownCounty, "no forecast for county " + county.fips());
  return PointForecast{id, county, as_of, horizon, it->second[static_cast<std::size_t>(id)]};
}

BaselineForecasts predict_all(const Panel& panel, std::size_t as_of_index, Horizon horizon, const FitConfig& config) {
  config.validate();
  if (as_of_index >= panel.num_days()) {
    throw Error(ErrorKind::DateOutOfRange, "forecast day index " + std::to_string(as_of_index) +
                                               " beyond panel end " + format_date(panel.end_date()));
  }
  const int h = horizon.days();
  const std::size_t k = std::min(config.k_fit, as_of_index + 1);
  const double eps = config.log_shift;

  BaselineForecasts out;
  out.as_of = panel.day_at(as_of_index);
  out.horizon = horizon;

  std::vector<CountyWindow> windows;
  windows.reserve(panel.county_count());
  for (const auto& [county, series] : panel.series()) {
    CountyWindow w{county, {}, 0.0, false};
    const auto span = window(std::span<const std::int64_t>(series.cum_deaths), as_of_index, k);
    w.deaths.assign(span.begin(), span.end());
    w.last = w.deaths.back();
    const auto positive = std::count_if(w.deaths.begin(), w.deaths.end(), [](double v) { return v > 0.0; });
    w.informative = k >= config.min_points && static_cast<std::size_t>(positive) >= config.min_points;
    windows.push_back(std::move(w));
  }

  std::vector<const CountyWindow*> informative;
  for (const auto& w : windows) {
    auto& slot = out.values[w.county];
    slot.fill(w.last);
    if (w.informative) {
      informative.push_back(&w);
    } else {
      for (auto id : kAllPredictors) {
        out.fallbacks.push_back({id, w.county, "fewer than min_points informative days; persistence"});
      }
    }
  }

  // Per-county log-space windows, shared by p2, p3, p4 and p5.
  std::map<CountyId, std::vector<double>> logged;
  for (const auto* w : informative) {
    auto& z = logged[w->county];
    z.resize(w->deaths.size());
    std::transform(w->deaths.begin(), w->deaths.end(), z.begin(), [&](double v) { return std::log(v + eps); });
  }
  const double x_mean = (static_cast<double>(k) - 1.0) / 2.0;
  const double x_forecast = static_cast<double>(k) - 1.0 + h;

  // p1, p2
  for (const auto* w : informative) {
    auto& slot = out.values[w->county];
    slot[0] = clamp_forecast(fit_linear(w->deaths, config.min_points).extrapolate(h), w->last);
    slot[1] = clamp_forecast(fit_exponential(w->deaths, eps, config.min_points).extrapolate(h), w->last);
  }

  // p3: pooled growth rate with per-county intercepts (within estimator).
  {
    double sxz = 0.0;
    double sxx = 0.0;
    for (const auto* w : informative) {
      if (w->last < kSharedExpMinDeaths) continue;
      const auto& z = logged.at(w->county);
      const double zm = std::accumulate(z.begin(), z.end(), 0.0) / static_cast<double>(z.size());
      for (std::size_t i = 0; i < z.size(); ++i) {
        const double dx = static_cast<double>(i) - x_mean;
        sxx += dx * dx;
        sxz += dx * (z[i] - zm);
      }
    }
    if (sxx > 0.0) {
      const double rate = sxz / sxx;
      for (const auto* w : informative) {
        const auto& z = logged.at(w->county);
        const double zm = std::accumulate(z.begin(), z.end(), 0.0) / static_cast<double>(z.size());
        const double value = std::exp(zm + rate * (x_forecast - x_mean)) - eps;
        out.values[w->county][2] = clamp_forecast(value, w->last);
      }
    } else {
      for (const auto* w : informative) {
        out.fallbacks.push_back({PredictorId::SharedExp, w->county, "no county with >= 10 deaths to pool; persistence"});
      }
    }
  }

  // p4: pooled regression on time and standardized demographics.
  if (!informative.empty()) {
    const auto demo = standardized_demographics(panel, informative);
    const auto rows = static_cast<Eigen::Index>(informative.size() * k);
    Eigen::MatrixXd x(rows, 5);
    Eigen::VectorXd z(rows);
    Eigen::Index r = 0;
    for (std::size_t c = 0; c < informative.size(); ++c) {
      const auto& zc = logged.at(informative[c]->county);
      for (std::size_t i = 0; i < k; ++i, ++r) {
        x.row(r) << 1.0, static_cast<double>(i) - x_mean, demo[c][0], demo[c][1], demo[c][2];
        z(r) = zc[i];
      }
    }
    const Eigen::VectorXd beta = least_squares(x, z);
    for (std::size_t c = 0; c < informative.size(); ++c) {
      Eigen::VectorXd row(5);
      row << 1.0, x_forecast - x_mean, demo[c][0], demo[c][1], demo[c][2];
      const double value = std::exp(row.dot(beta)) - eps;
      out.values[informative[c]->county][3] = clamp_forecast(value, informative[c]->last);
    }
  }

  // p5: own log trend plus log neighbor-sum deaths lagged by the horizon, so
  // the regressor at the forecast step is already observed.
  for (const auto* w : informative) {
    auto& slot = out.values[w->county];
    const auto& nbrs = panel.neighbors(w->county);
    const std::size_t first = as_of_index + 1 - k;
    auto neighbor_sum = [&](std::size_t day) {
      double s = 0.0;
      for (const auto& n : nbrs) s += static_cast<double>(panel.deaths(n, day));
      return s;
    };
    // Rows i whose lagged day first + i - h exists.
    std::vector<std::size_t> usable;
    for (std::size_t i = 0; i < k; ++i) {
      if (first + i >= static_cast<std::size_t>(h)) usable.push_back(i);
    }
    if (nbrs.empty() || usable.size() < config.min_points) {
      slot[4] = slot[1];
      continue;
    }
    const auto& zc = logged.at(w->county);
    std::vector<double> lag(usable.size());
    for (std::size_t j = 0; j < usable.size(); ++j) lag[j] = std::log(neighbor_sum(first + usable[j] - h) + eps);
    const double lag_mean = std::accumulate(lag.begin(), lag.end(), 0.0) / static_cast<double>(lag.size());
    double lag_ss = 0.0;
    for (double v : lag) lag_ss += (v - lag_mean) * (v - lag_mean);
    if (!(lag_ss > 1e-12)) {
      slot[4] = slot[1];
      continue;
    }
    Eigen::MatrixXd x(static_cast<Eigen::Index>(usable.size()), 3);
    Eigen::VectorXd z(static_cast<Eigen::Index>(usable.size()));
    for (std::size_t j = 0; j < usable.size(); ++j) {
      const auto r = static_cast<Eigen::Index>(j);
      x.row(r) << 1.0, static_cast<double>(usable[j]) - x_mean, lag[j] - lag_mean;
      z(r) = zc[usable[j]];
    }
    const Eigen::VectorXd beta = least_squares(x, z);
    Eigen::Vector3d row(1.0, x_forecast - x_mean, std::log(neighbor_sum(as_of_index) + eps) - lag_mean);
    const double value = std::exp(row.dot(beta)) - eps;
    slot[4] = clamp_forecast(persistence_or(value, slot[1]), w->last);
  }

  return out;
}

}  // namespace clepcast
