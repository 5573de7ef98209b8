#ifndef CLEPCAST_CLEPCAST_H
#define CLEPCAST_CLEPCAST_H

/*
 * C interface to the clepcast forecasting library.
 *
 * Every function returns a clep_status. On failure the calling thread's last
 * error (clep_last_error / clep_last_error_kind) describes what went wrong and
 * output parameters are left untouched. Status values double as the CLI's
 * process exit codes.
 */

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  define CLEP_API __declspec(dllexport)
#elif defined(CLEPCAST_BUILDING_LIBRARY)
#  define CLEP_API __attribute__((visibility("default")))
#else
#  define CLEP_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum clep_status {
  CLEP_OK = 0,
  CLEP_ERR_INVALID = 1,         /* bad argument, config or usage */
  CLEP_ERR_DATA = 2,            /* schema, parse or data-integrity error */
  CLEP_ERR_IO = 3,
  CLEP_ERR_DATE_RANGE = 4,      /* date outside the panel calendar */
  CLEP_ERR_NO_HOSPITALS = 5,    /* hospital source missing */
  CLEP_ERR_WARMUP = 6,          /* backtest start leaves too little history */
  CLEP_ERR_NO_GEOMETRY = 7,     /* county geometry file missing */
  CLEP_ERR_STALE_STATE = 8,
  CLEP_ERR_BUSY = 9,            /* output directory locked by another run */
  CLEP_ERR_INTERNAL = 10
} clep_status;

CLEP_API const char* clep_version(void);

/* Message and error-kind name ("SchemaMismatch", ...) of the last failure on
 * this thread. Empty strings after a success. */
CLEP_API const char* clep_last_error(void);
CLEP_API const char* clep_last_error_kind(void);

/* ------------------------------------------------------------------------ */
/* Run configuration and commands                                           */

typedef struct clep_config clep_config;

/* Receives one JSON object per line: {"level","code","message"}. */
typedef void (*clep_diagnostic_fn)(const char* json_line, void* user_data);

CLEP_API clep_status clep_config_load(const char* path, clep_config** out);
CLEP_API void clep_config_free(clep_config* config);

CLEP_API clep_status clep_config_set_output(clep_config* config, const char* dir);
CLEP_API clep_status clep_config_set_horizons(clep_config* config, const int* horizons, size_t count);
/* Comma-separated subset of csv,json,geojson,html. */
CLEP_API clep_status clep_config_set_formats(clep_config* config, const char* formats);
/* Non-zero suppresses info-level diagnostics; warnings and errors still flow. */
CLEP_API clep_status clep_config_set_quiet(clep_config* config, int quiet);
CLEP_API clep_status clep_config_set_diagnostics(clep_config* config, clep_diagnostic_fn fn, void* user_data);

/* Dates are ISO YYYY-MM-DD; NULL selects the default. */
CLEP_API clep_status clep_ingest(const clep_config* config);
CLEP_API clep_status clep_forecast(const clep_config* config, const char* as_of);
CLEP_API clep_status clep_severity(const clep_config* config, const char* as_of);
CLEP_API clep_status clep_backtest(const clep_config* config, const char* start, const char* end);
CLEP_API clep_status clep_export(const clep_config* config);

typedef struct clep_sample_spec {
  const char* regime; /* linear, exponential, logistic or switching */
  size_t counties;
  size_t days;
  size_t hospitals;
  double sigma;
  uint64_t seed;
} clep_sample_spec;

/* The bundled sample: 50 counties, 60 days, 120 hospitals. */
CLEP_API void clep_sample_spec_default(clep_sample_spec* spec);
CLEP_API clep_status clep_write_sample(const char* dir, const clep_sample_spec* spec);

/* ------------------------------------------------------------------------ */
/* Numeric building blocks                                                  */

/* strict = 0 clamps negatives to zero; strict != 0 rejects them. Dips are
 * repaired with the running maximum either way. */
CLEP_API clep_status clep_validate_cumulative(const int64_t* raw, size_t n, int strict, int64_t* out,
                                              size_t* repairs);

CLEP_API clep_status clep_fit_linear(const double* y, size_t n, double* slope, double* intercept);
CLEP_API clep_status clep_fit_exponential(const double* y, size_t n, double log_shift, double* growth_rate,
                                          double* level);

/* Interval from up to the last five (predicted, actual) pairs; n = 0 gives
 * the provisional cold-start interval. */
CLEP_API clep_status clep_mepi_interval(const double* predicted, const double* actual, size_t n, double center,
                                        double last_observed, double* lower, double* upper, double* delta);

CLEP_API clep_status clep_impute_hospital(double county_value, const int64_t* employees, size_t n, double* out);

/* out[0] = MAE, out[1] = RMSE, out[2] = mean |yhat - y| / (y + 1). */
CLEP_API clep_status clep_losses(const double* predicted, const double* actual, size_t n, double out[3]);

typedef struct clep_ensemble clep_ensemble;

CLEP_API clep_status clep_ensemble_new(size_t predictors, double mu, double c, clep_ensemble** out);
CLEP_API void clep_ensemble_free(clep_ensemble* ensemble);
CLEP_API clep_status clep_ensemble_update(clep_ensemble* ensemble, const double* losses, size_t n);
CLEP_API clep_status clep_ensemble_weights(const clep_ensemble* ensemble, double* out, size_t n);
CLEP_API clep_status clep_ensemble_combine(const clep_ensemble* ensemble, const double* forecasts, size_t n,
                                           double* out);

#ifdef __cplusplus
}
#endif

#endif
