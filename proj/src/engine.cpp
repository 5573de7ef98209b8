#include "clepcast/engine.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace clepcast {

EnsembleState::EnsembleState(Horizon h, EnsembleConfig cfg, std::vector<PredictorId> registered)
    : horizon(h), config(cfg), predictors(std::move(registered)) {
  config.validate();
  if (predictors.empty()) throw Error(ErrorKind::InvalidArgument, "an ensemble needs at least one predictor");
  auto sorted = predictors;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    throw Error(ErrorKind::InvalidArgument, "predictor registered twice");
  }
}

CountyEnsemble& EnsembleState::county(const CountyId& id) {
  auto it = counties.find(id);
  if (it == counties.end()) {
    it = counties.emplace(id, CountyEnsemble{WeightState::uniform(predictors.size()), {}, {}}).first;
  }
  return it->second;
}

const CountyEnsemble* EnsembleState::find(const CountyId& id) const {
  auto it = counties.find(id);
  return it == counties.end() ? nullptr : &it->second;
}

std::map<CountyId, ClepForecast> issue(const EnsembleState& state, const Panel& panel, std::size_t day_index,
                                       const FitConfig& fit) {
  const BaselineForecasts base = predict_all(panel, day_index, state.horizon, fit);
  const std::vector<double> uniform = WeightState::uniform(state.predictors.size()).weights;

  std::map<CountyId, ClepForecast> out;
  for (const auto& [county, values] : base.values) {
    ClepForecast f{county, base.as_of, state.horizon, 0.0, 0.0, values, {}, {}};
    f.last_observed = static_cast<double>(panel.deaths(county, day_index));
    const CountyEnsemble* ce = state.find(county);
    f.weights = ce ? ce->weights.weights : uniform;

    std::vector<double> registered;
    registered.reserve(state.predictors.size());
    for (auto id : state.predictors) registered.push_back(values[static_cast<std::size_t>(id)]);
    f.value = combine(f.weights, registered);

    if (ce) {
      const std::vector<ScoredPair> hist(ce->history.begin(), ce->history.end());
      f.interval = make_interval(hist, f.value, f.last_observed);
    } else {
      f.interval = make_interval({}, f.value, f.last_observed);
    }
    out.emplace(county, std::move(f));
  }
  return out;
}

StepReport step(EnsembleState& state, const Panel& panel, std::size_t day_index, const FitConfig& fit) {
  const Day today = panel.day_at(day_index);
  if (state.last_issue && today <= *state.last_issue) {
    throw Error(ErrorKind::InvalidArgument,
                "state already issued through " + format_date(*state.last_issue) + "; cannot step " + format_date(today));
  }
  const int h = state.horizon.days();
  StepReport report;

  for (auto& [county, ce] : state.counties) {
    while (!ce.pending.empty() && ce.pending.front().issued + h <= today) {
      PendingForecast p = std::move(ce.pending.front());
      ce.pending.pop_front();
      if (p.issued + h != today) {
        throw Error(ErrorKind::InvalidArgument, "pending forecast for " + county.fips() + " skipped its target day");
      }
      const double actual = static_cast<double>(panel.deaths(county, day_index));
      std::vector<double> losses(p.baselines.size());
      std::transform(p.baselines.begin(), p.baselines.end(), losses.begin(),
                     [&](double f) { return tracking_loss(f, actual); });
      update_weights(ce.weights, losses, state.config);
      const double total = std::accumulate(ce.weights.weights.begin(), ce.weights.weights.end(), 0.0);
      report.max_weight_sum_error = std::max(report.max_weight_sum_error, std::abs(total - 1.0));

      ce.history.push_back({p.clep, actual});
      while (ce.history.size() > kMepiWindow) ce.history.pop_front();
      report.scored.push_back({county, p.issued, today, std::move(p.baselines), p.clep, actual, p.interval});
      state.last_scored_issue = p.issued;
    }
  }

  report.issued = issue(state, panel, day_index, fit);
  for (const auto& [county, f] : report.issued) {
    PendingForecast p;
    p.issued = today;
    for (auto id : state.predictors) p.baselines.push_back(f.baselines[static_cast<std::size_t>(id)]);
    p.clep = f.value;
    p.interval = f.interval;
    state.county(county).pending.push_back(std::move(p));
  }
  if (!state.first_issue) state.first_issue = today;
  state.last_issue = today;
  return report;
}

std::size_t default_first_issue(const FitConfig& fit) noexcept { return fit.k_fit - 1; }

std::vector<StepReport> advance(EnsembleState& state, const Panel& panel, std::size_t through_index,
                                const FitConfig& fit) {
  if (through_index >= panel.num_days()) {
    throw Error(ErrorKind::DateOutOfRange, "cannot advance beyond panel end " + format_date(panel.end_date()));
  }
  std::size_t next = std::min(default_first_issue(fit), through_index);
  if (state.last_issue) {
    const auto idx = panel.index_of(*state.last_issue);
    if (!idx) {
      throw Error(ErrorKind::CalendarMismatch,
                  "ensemble state last issued " + format_date(*state.last_issue) + ", outside the panel calendar");
    }
    next = *idx + 1;
  }
  std::vector<StepReport> reports;
  for (std::size_t d = next; d <= through_index; ++d) reports.push_back(step(state, panel, d, fit));
  return reports;
}

std::map<CountyId, ClepForecast> clep_predict(const Panel& panel, Day as_of, const EnsembleState& state,
                                              const FitConfig& fit) {
  const auto idx = panel.index_of(as_of);
  if (!idx) throw Error(ErrorKind::DateOutOfRange, format_date(as_of) + " is outside the panel calendar");
  const int h = state.horizon.days();
  const Day scoreable = as_of - h;
  if (state.last_scored_issue && *state.last_scored_issue > scoreable) {
    throw Error(ErrorKind::InvalidArgument, "ensemble state has scored forecasts maturing after " + format_date(as_of));
  }
  const Day oldest_ok = scoreable - state.config.grace_days;
  const bool nothing_scoreable = !state.first_issue || oldest_ok < *state.first_issue;
  if (!nothing_scoreable && (!state.last_scored_issue || *state.last_scored_issue < oldest_ok)) {
    throw Error(ErrorKind::StaleState,
                "ensemble state scored through " +
                    (state.last_scored_issue ? format_date(*state.last_scored_issue) : std::string("nothing")) +
                    ", need " + format_date(scoreable) + " (grace " + std::to_string(state.config.grace_days) +
                    " days)");
  }
  return issue(state, panel, *idx, fit);
}

}  // namespace clepcast
