#include "clepcast/clepcast.h"

#include <algorithm>
#include <exception>
#include <memory>
#include <optional>
#include <string>

#include "clepcast/clep.hpp"
#include "clepcast/core.hpp"
#include "clepcast/evalharness.hpp"
#include "clepcast/mepi.hpp"
#include "clepcast/pipeline.hpp"
#include "clepcast/predictors.hpp"
#include "clepcast/run_config.hpp"
#include "clepcast/severity.hpp"

struct clep_config {
  clepcast::RunConfig config;
  clep_diagnostic_fn diagnostics = nullptr;
  void* user_data = nullptr;
  bool quiet = false;
};

struct clep_ensemble {
  clepcast::WeightState state;
  clepcast::EnsembleConfig config;
};

namespace {

thread_local std::string g_last_error;
thread_local std::string g_last_kind;

void send(const clep_config* cfg, std::string_view line) {
  if (cfg && cfg->diagnostics) {
    const std::string copy(line);
    cfg->diagnostics(copy.c_str(), cfg->user_data);
  }
}

clepcast::DiagnosticSink sink_for(const clep_config* cfg) {
  return [cfg](std::string_view line) {
    if (cfg->quiet && line.find("\"level\":\"info\"") != std::string_view::npos) return;
    send(cfg, line);
  };
}

clep_status fail(const clep_config* cfg, clep_status status, std::string kind, std::string message) {
  g_last_kind = std::move(kind);
  g_last_error = std::move(message);
  send(cfg, clepcast::diagnostic_json("error", g_last_kind, g_last_error));
  return status;
}

// Runs `body`, translating exceptions into status codes and diagnostics.
template <class F>
clep_status guarded(const clep_config* cfg, F&& body) {
  g_last_error.clear();
  g_last_kind.clear();
  try {
    body();
    return CLEP_OK;
  } catch (const clepcast::Error& e) {
    return fail(cfg, static_cast<clep_status>(clepcast::exit_code(e.kind())), std::string(clepcast::to_string(e.kind())),
                e.what());
  } catch (const std::bad_alloc&) {
    return fail(cfg, CLEP_ERR_INTERNAL, "OutOfMemory", "out of memory");
  } catch (const std::exception& e) {
    return fail(cfg, CLEP_ERR_INTERNAL, "Internal", e.what());
  } catch (...) {
    return fail(cfg, CLEP_ERR_INTERNAL, "Internal", "unknown failure");
  }
}

void require(bool ok, const char* what) {
  if (!ok) throw clepcast::Error(clepcast::ErrorKind::InvalidArgument, what);
}

std::optional<clepcast::Day> optional_date(const char* text) {
  if (!text || !*text) return std::nullopt;
  return clepcast::parse_date(text);
}

}  // namespace

extern "C" {

CLEP_API const char* clep_version(void) { return "0.1.0"; }
CLEP_API const char* clep_last_error(void) { return g_last_error.c_str(); }
CLEP_API const char* clep_last_error_kind(void) { return g_last_kind.c_str(); }

CLEP_API clep_status clep_config_load(const char* path, clep_config** out) {
  return guarded(nullptr, [&] {
    require(path && out, "clep_config_load: null argument");
    auto cfg = std::make_unique<clep_config>();
    cfg->config = clepcast::load_run_config(path);
    *out = cfg.release();
  });
}

CLEP_API void clep_config_free(clep_config* config) { delete config; }

CLEP_API clep_status clep_config_set_output(clep_config* config, const char* dir) {
  return guarded(config, [&] {
    require(config && dir && *dir, "clep_config_set_output: null or empty argument");
    config->config.output_dir = dir;
  });
}

CLEP_API clep_status clep_config_set_horizons(clep_config* config, const int* horizons, size_t count) {
  return guarded(config, [&] {
    require(config && horizons && count > 0, "clep_config_set_horizons: need at least one horizon");
    std::string list;
    for (size_t i = 0; i < count; ++i) list += (i ? "," : "") + std::to_string(horizons[i]);
    config->config.horizons = clepcast::parse_horizon_list(list);
  });
}

CLEP_API clep_status clep_config_set_formats(clep_config* config, const char* formats) {
  return guarded(config, [&] {
    require(config && formats, "clep_config_set_formats: null argument");
    config->config.formats = clepcast::parse_format_list(formats);
  });
}

CLEP_API clep_status clep_config_set_quiet(clep_config* config, int quiet) {
  return guarded(config, [&] {
    require(config, "clep_config_set_quiet: null config");
    config->quiet = quiet != 0;
  });
}

CLEP_API clep_status clep_config_set_diagnostics(clep_config* config, clep_diagnostic_fn fn, void* user_data) {
  return guarded(config, [&] {
    require(config, "clep_config_set_diagnostics: null config");
    config->diagnostics = fn;
    config->user_data = user_data;
  });
}

CLEP_API clep_status clep_ingest(const clep_config* config) {
  return guarded(config, [&] {
    require(config, "clep_ingest: null config");
    clepcast::cmd_ingest(config->config, sink_for(config));
  });
}

CLEP_API clep_status clep_forecast(const clep_config* config, const char* as_of) {
  return guarded(config, [&] {
    require(config, "clep_forecast: null config");
    clepcast::cmd_forecast(config->config, optional_date(as_of), sink_for(config));
  });
}

CLEP_API clep_status clep_severity(const clep_config* config, const char* as_of) {
  return guarded(config, [&] {
    require(config, "clep_severity: null config");
    clepcast::cmd_severity(config->config, optional_date(as_of), sink_for(config));
  });
}

CLEP_API clep_status clep_backtest(const clep_config* config, const char* start, const char* end) {
  return guarded(config, [&] {
    require(config, "clep_backtest: null config");
    clepcast::cmd_backtest(config->config, optional_date(start), optional_date(end), sink_for(config));
  });
}

CLEP_API clep_status clep_export(const clep_config* config) {
  return guarded(config, [&] {
    require(config, "clep_export: null config");
    clepcast::cmd_export(config->config, sink_for(config));
  });
}

CLEP_API void clep_sample_spec_default(clep_sample_spec* spec) {
  if (!spec) return;
  const auto d = clepcast::default_sample_spec();
  spec->regime = "switching";
  spec->counties = d.synth.counties;
  spec->days = d.synth.days;
  spec->hospitals = d.hospitals;
  spec->sigma = d.synth.sigma;
  spec->seed = d.synth.seed;
}

CLEP_API clep_status clep_write_sample(const char* dir, const clep_sample_spec* spec) {
  return guarded(nullptr, [&] {
    require(dir && *dir && spec, "clep_write_sample: null argument");
    auto s = clepcast::default_sample_spec();
    if (spec->regime) s.synth.regime = clepcast::regime_from_string(spec->regime);
    s.synth.counties = spec->counties;
    s.synth.days = spec->days;
    s.synth.sigma = spec->sigma;
    s.synth.seed = spec->seed;
    s.hospitals = spec->hospitals;
    clepcast::write_sample_dataset(dir, s);
  });
}

CLEP_API clep_status clep_validate_cumulative(const int64_t* raw, size_t n, int strict, int64_t* out,
                                              size_t* repairs) {
  return guarded(nullptr, [&] {
    require((raw && out) || n == 0, "clep_validate_cumulative: null buffer");
    const auto policy = strict ? clepcast::MonotoneFixPolicy::Strict : clepcast::MonotoneFixPolicy::RunningMax;
    const auto r = clepcast::validate_cumulative(std::span<const std::int64_t>(raw, n), policy);
    std::copy(r.values.begin(), r.values.end(), out);
    if (repairs) *repairs = r.repairs.size();
  });
}

CLEP_API clep_status clep_fit_linear(const double* y, size_t n, double* slope, double* intercept) {
  return guarded(nullptr, [&] {
    require(y && slope && intercept, "clep_fit_linear: null argument");
    const auto f = clepcast::fit_linear(std::span<const double>(y, n));
    *slope = f.slope;
    *intercept = f.intercept;
  });
}

CLEP_API clep_status clep_fit_exponential(const double* y, size_t n, double log_shift, double* growth_rate,
                                          double* level) {
  return guarded(nullptr, [&] {
    require(y && growth_rate && level, "clep_fit_exponential: null argument");
    const auto f = clepcast::fit_exponential(std::span<const double>(y, n), log_shift);
    *growth_rate = f.growth_rate;
    *level = f.level;
  });
}

CLEP_API clep_status clep_mepi_interval(const double* predicted, const double* actual, size_t n, double center,
                                        double last_observed, double* lower, double* upper, double* delta) {
  return guarded(nullptr, [&] {
    require((predicted && actual) || n == 0, "clep_mepi_interval: null history");
    require(lower && upper, "clep_mepi_interval: null output");
    std::vector<clepcast::ScoredPair> history;
    for (size_t i = 0; i < n; ++i) history.push_back({predicted[i], actual[i]});
    const auto iv = n == 0 ? clepcast::provisional_interval(center, last_observed)
                           : clepcast::mepi_interval(history, center, last_observed);
    *lower = iv.lower;
    *upper = iv.upper;
    if (delta) *delta = iv.delta;
  });
}

CLEP_API clep_status clep_impute_hospital(double county_value, const int64_t* employees, size_t n, double* out) {
  return guarded(nullptr, [&] {
    require((employees && out) || n == 0, "clep_impute_hospital: null buffer");
    const auto shares = clepcast::impute_hospital(county_value, std::span<const std::int64_t>(employees, n));
    std::copy(shares.begin(), shares.end(), out);
  });
}

CLEP_API clep_status clep_losses(const double* predicted, const double* actual, size_t n, double out[3]) {
  return guarded(nullptr, [&] {
    require(((predicted && actual) || n == 0) && out, "clep_losses: null argument");
    const auto l = clepcast::losses(std::span<const double>(predicted, n), std::span<const double>(actual, n));
    out[0] = l.mae;
    out[1] = l.rmse;
    out[2] = l.mare;
  });
}

CLEP_API clep_status clep_ensemble_new(size_t predictors, double mu, double c, clep_ensemble** out) {
  return guarded(nullptr, [&] {
    require(out && predictors > 0, "clep_ensemble_new: need an output handle and at least one predictor");
    auto e = std::make_unique<clep_ensemble>();
    e->config.mu = mu;
    e->config.c = c;
    e->config.validate();
    e->state = clepcast::WeightState::uniform(predictors);
    *out = e.release();
  });
}

CLEP_API void clep_ensemble_free(clep_ensemble* ensemble) { delete ensemble; }

CLEP_API clep_status clep_ensemble_update(clep_ensemble* ensemble, const double* losses, size_t n) {
  return guarded(nullptr, [&] {
    require(ensemble && losses, "clep_ensemble_update: null argument");
    require(n == ensemble->state.size(), "clep_ensemble_update: loss count differs from predictor count");
    clepcast::update_weights(ensemble->state, std::span<const double>(losses, n), ensemble->config);
  });
}

CLEP_API clep_status clep_ensemble_weights(const clep_ensemble* ensemble, double* out, size_t n) {
  return guarded(nullptr, [&] {
    require(ensemble && out, "clep_ensemble_weights: null argument");
    require(n == ensemble->state.size(), "clep_ensemble_weights: buffer size differs from predictor count");
    std::copy(ensemble->state.weights.begin(), ensemble->state.weights.end(), out);
  });
}

CLEP_API clep_status clep_ensemble_combine(const clep_ensemble* ensemble, const double* forecasts, size_t n,
                                           double* out) {
  return guarded(nullptr, [&] {
    require(ensemble && forecasts && out, "clep_ensemble_combine: null argument");
    require(n == ensemble->state.size(), "clep_ensemble_combine: forecast count differs from predictor count");
    *out = clepcast::combine(ensemble->state.weights, std::span<const double>(forecasts, n));
  });
}

}  // extern "C"
