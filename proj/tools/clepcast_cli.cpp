// clepcast: daily county death forecasting pipeline.
//
//   clepcast ingest   --config run.ini
//   clepcast forecast --config run.ini [--as-of 2020-04-29] [--horizon 5 ...]
//   clepcast severity --config run.ini [--as-of DATE]
//   clepcast backtest --config run.ini [--start DATE] [--end DATE]
//   clepcast export   --config run.ini
//   clepcast synth    --out DIR [--seed N] [--regime switching] ...
//
// Diagnostics go to stderr as one JSON object per line. The exit status is
// the library status code (see clepcast.h).

#include <cstdio>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "clepcast/clepcast.h"

namespace {

void print_diagnostic(const char* line, void*) { std::fprintf(stderr, "%s\n", line); }

std::string json_escape(const std::string& s) {
  std::string out;
  for (char ch : s) {
    switch (ch) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      default:
        if (static_cast<unsigned char>(ch) < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof buf, "\\u%04x", ch);
          out += buf;
        } else {
          out += ch;
        }
    }
  }
  return out;
}

int usage_error(const std::string& message) {
  std::fprintf(stderr, "{\"level\":\"error\",\"code\":\"Usage\",\"message\":\"%s\"}\n", json_escape(message).c_str());
  return CLEP_ERR_INVALID;
}

struct Options {
  std::string config;
  std::string out;
  std::string formats;
  std::vector<int> horizons;
  bool quiet = false;
  std::string as_of;
  std::string start;
  std::string end;
  std::uint64_t seed = 0;
  bool seed_set = false;
  std::string regime = "switching";
  std::size_t counties = 0;
  std::size_t days = 0;
  std::size_t hospitals = 0;
  double sigma = -1.0;
};

clep_status open_config(const Options& opt, clep_config** cfg) {
  if (opt.config.empty()) return static_cast<clep_status>(usage_error("no config: pass --config or set CLEP_FORECAST_CONFIG"));
  clep_status st = clep_config_load(opt.config.c_str(), cfg);
  if (st != CLEP_OK) {
    print_diagnostic(("{\"level\":\"error\",\"code\":\"" + std::string(clep_last_error_kind()) + "\",\"message\":\"" +
                      json_escape(clep_last_error()) + "\"}")
                         .c_str(),
                     nullptr);
    return st;
  }
  clep_config_set_diagnostics(*cfg, print_diagnostic, nullptr);
  clep_config_set_quiet(*cfg, opt.quiet ? 1 : 0);
  if (!opt.out.empty() && (st = clep_config_set_output(*cfg, opt.out.c_str())) != CLEP_OK) return st;
  if (!opt.horizons.empty() &&
      (st = clep_config_set_horizons(*cfg, opt.horizons.data(), opt.horizons.size())) != CLEP_OK) {
    return st;
  }
  if (!opt.formats.empty() && (st = clep_config_set_formats(*cfg, opt.formats.c_str())) != CLEP_OK) return st;
  return CLEP_OK;
}

const char* or_null(const std::string& s) { return s.empty() ? nullptr : s.c_str(); }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"County-level death forecasting: baselines, CLEP ensemble, MEPI intervals, hospital severity"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_version_flag("--version", std::string(clep_version()));

  Options opt;
  app.add_option("--config", opt.config, "Run config (INI)")->envname("CLEP_FORECAST_CONFIG");
  app.add_option("--out", opt.out, "Output directory (overrides the config)");
  app.add_option("--format", opt.formats, "Comma list of csv,json,geojson,html");
  app.add_option("--horizon", opt.horizons, "Forecast horizon in days; repeatable")->check(CLI::Range(1, 21));
  app.add_flag("--quiet", opt.quiet, "Only warnings and errors on stderr");

  auto* ingest = app.add_subcommand("ingest", "Load, merge and clean sources into panel.json");
  auto* forecast = app.add_subcommand("forecast", "Update ensemble state and write forecasts");
  forecast->add_option("--as-of", opt.as_of, "Forecast date (default: last panel day)");
  auto* severity = app.add_subcommand("severity", "Score hospitals from the 5-day forecasts");
  severity->add_option("--as-of", opt.as_of, "Must match the forecast date");
  auto* backtest = app.add_subcommand("backtest", "Rolling-origin evaluation over a date range");
  backtest->add_option("--start", opt.start, "First forecast date");
  backtest->add_option("--end", opt.end, "Last forecast date");
  auto* export_cmd = app.add_subcommand("export", "GeoJSON map data and static HTML report");
  auto* synth = app.add_subcommand("synth", "Write a synthetic input dataset (the bundled sample by default)");
  auto* seed_opt = synth->add_option("--seed", opt.seed, "Random seed");
  synth->add_option("--regime", opt.regime, "linear, exponential, logistic or switching");
  synth->add_option("--counties", opt.counties, "Number of counties");
  synth->add_option("--days", opt.days, "Number of days");
  synth->add_option("--hospitals", opt.hospitals, "Number of hospitals");
  synth->add_option("--sigma", opt.sigma, "Log-normal noise scale")->check(CLI::NonNegativeNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return usage_error(e.what());
  }
  opt.seed_set = seed_opt->count() > 0;

  if (synth->parsed()) {
    if (opt.out.empty()) return usage_error("synth needs --out DIR");
    clep_sample_spec spec;
    clep_sample_spec_default(&spec);
    spec.regime = opt.regime.c_str();
    if (opt.seed_set) spec.seed = opt.seed;
    if (opt.counties) spec.counties = opt.counties;
    if (opt.days) spec.days = opt.days;
    if (opt.hospitals) spec.hospitals = opt.hospitals;
    if (opt.sigma >= 0) spec.sigma = opt.sigma;
    const clep_status st = clep_write_sample(opt.out.c_str(), &spec);
    if (st != CLEP_OK) {
      std::fprintf(stderr, "{\"level\":\"error\",\"code\":\"%s\",\"message\":\"%s\"}\n", clep_last_error_kind(),
                   json_escape(clep_last_error()).c_str());
    }
    return static_cast<int>(st);
  }

  clep_config* cfg = nullptr;
  clep_status st = open_config(opt, &cfg);
  if (st == CLEP_OK) {
    if (ingest->parsed()) {
      st = clep_ingest(cfg);
    } else if (forecast->parsed()) {
      st = clep_forecast(cfg, or_null(opt.as_of));
    } else if (severity->parsed()) {
      st = clep_severity(cfg, or_null(opt.as_of));
    } else if (backtest->parsed()) {
      st = clep_backtest(cfg, or_null(opt.start), or_null(opt.end));
    } else if (export_cmd->parsed()) {
      st = clep_export(cfg);
    }
  }
  clep_config_free(cfg);
  return static_cast<int>(st);
}
