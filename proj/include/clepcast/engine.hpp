#pragma once

// Day-ordered online loop for one horizon. On each day t the engine first
// scores the forecasts issued at t - h against the day-t actuals (updating
// weights and the interval history), then issues new forecasts for t + h.

#include <deque>
#include <map>
#include <optional>
#include <vector>

#include "clepcast/clep.hpp"
#include "clepcast/core.hpp"
#include "clepcast/mepi.hpp"
#include "clepcast/predictors.hpp"

namespace clepcast {

struct PendingForecast {
  Day issued = 0;
  std::vector<double> baselines;  // registered predictors, registration order
  double clep = 0.0;
  Interval interval;
};

struct CountyEnsemble {
  WeightState weights;
  std::deque<PendingForecast> pending;
  std::deque<ScoredPair> history;  // last kMepiWindow scored CLEP forecasts
};

struct EnsembleState {
  EnsembleState(Horizon h, EnsembleConfig cfg, std::vector<PredictorId> registered = {kAllPredictors.begin(),
                                                                                         kAllPredictors.end()});

  Horizon horizon;
  EnsembleConfig config;
  std::vector<PredictorId> predictors;
  std::optional<Day> first_issue;
  std::optional<Day> last_issue;
  std::optional<Day> last_scored_issue;
  std::map<CountyId, CountyEnsemble> counties;

  /// Existing entry, or a fresh one with uniform weights.
  CountyEnsemble& county(const CountyId& id);
  const CountyEnsemble* find(const CountyId& id) const;
};

struct ClepForecast {
  CountyId county;
  Day as_of = 0;
  Horizon horizon{1};
  double value = 0.0;
  double last_observed = 0.0;
  std::array<double, kPredictorCount> baselines{};  // all five, by PredictorId
  std::vector<double> weights;                      // registered predictors
  Interval interval;
};

struct ScoredOutcome {
  CountyId county;
  Day issued = 0;
  Day target = 0;
  std::vector<double> baselines;  // registered predictors
  double clep = 0.0;
  double actual = 0.0;
  Interval interval;
};

struct StepReport {
  std::vector<ScoredOutcome> scored;
  std::map<CountyId, ClepForecast> issued;
  double max_weight_sum_error = 0.0;
};

/// Forecasts at `day_index` from the current state, without mutating it.
std::map<CountyId, ClepForecast> issue(const EnsembleState& state, const Panel& panel, std::size_t day_index,
                                       const FitConfig& fit);

/// Scores forecasts maturing at `day_index`, then issues and records new ones.
StepReport step(EnsembleState& state, const Panel& panel, std::size_t day_index, const FitConfig& fit);

/// First issue day of a fresh state: the first day with a full fit window.
std::size_t default_first_issue(const FitConfig& fit) noexcept;

/// Steps from the day after state.last_issue (or the default first issue day)
/// through `through_index`. Returns the per-step reports in day order.
std::vector<StepReport> advance(EnsembleState& state, const Panel& panel, std::size_t through_index,
                                const FitConfig& fit);

/// CLEP forecasts at `as_of`. The state must have scored through
/// as_of - h (within the configured grace), else StaleState.
std::map<CountyId, ClepForecast> clep_predict(const Panel& panel, Day as_of, const EnsembleState& state,
                                              const FitConfig& fit);

}  // namespace clepcast
