#pragma once

// The five commands behind the CLI. Each reads its inputs, writes its
// artifacts under RunConfig::output_dir (atomically, file by file) and
// reports progress through an optional sink of line-delimited JSON.

#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "clepcast/core.hpp"
#include "clepcast/engine.hpp"
#include "clepcast/evalharness.hpp"
#include "clepcast/export.hpp"
#include "clepcast/run_config.hpp"
#include "clepcast/severity.hpp"

namespace clepcast {

namespace artifact {
inline constexpr std::string_view kPanel = "panel.json";
inline constexpr std::string_view kIngestLog = "ingest_log.jsonl";
inline constexpr std::string_view kEnsembleState = "ensemble_state.json";
inline constexpr std::string_view kEnsembleInputs = "ensemble_inputs.json";
inline constexpr std::string_view kForecastsCsv = "forecasts.csv";
inline constexpr std::string_view kForecastsJson = "forecasts.json";
inline constexpr std::string_view kSeverityCsv = "severity.csv";
inline constexpr std::string_view kSeverityJson = "severity.json";
inline constexpr std::string_view kBacktestJson = "backtest.json";
inline constexpr std::string_view kBacktestTable = "backtest.txt";
inline constexpr std::string_view kMap = "map.geojson";
inline constexpr std::string_view kReport = "report.html";
inline constexpr std::string_view kLock = ".clepcast.lock";
}  // namespace artifact

/// Severity forecasts and the export map use this horizon.
inline constexpr int kSeverityHorizon = 5;

using DiagnosticSink = std::function<void(std::string_view json_line)>;

/// {"level":..,"code":..,"message":..}
std::string diagnostic_json(std::string_view level, std::string_view code, std::string_view message);

/// Process exit code for an error kind (0 is success, 10 is reserved for
/// unexpected internal failures).
int exit_code(ErrorKind kind) noexcept;

/// Advisory flock on <dir>/.clepcast.lock, held for the lifetime of the
/// object. Throws Busy when another process holds it.
class OutputLock {
 public:
  explicit OutputLock(const std::filesystem::path& dir);
  ~OutputLock();
  OutputLock(const OutputLock&) = delete;
  OutputLock& operator=(const OutputLock&) = delete;

 private:
  int fd_ = -1;
};

struct IngestResult {
  Panel panel;
  std::size_t repairs = 0;
  std::size_t conflicts = 0;
  std::vector<Warning> warnings;
};

struct ForecastResult {
  Day as_of = 0;
  std::map<Horizon, std::map<CountyId, ClepForecast>> forecasts;
};

IngestResult cmd_ingest(const RunConfig& config, const DiagnosticSink& sink = {});

/// Brings the stored ensemble state for every configured horizon up to
/// `as_of` (default: last panel day) and issues forecasts from it.
ForecastResult cmd_forecast(const RunConfig& config, std::optional<Day> as_of, const DiagnosticSink& sink = {});

SeverityAssessment cmd_severity(const RunConfig& config, std::optional<Day> as_of, const DiagnosticSink& sink = {});

std::vector<BacktestReport> cmd_backtest(const RunConfig& config, std::optional<Day> start, std::optional<Day> end,
                                         const DiagnosticSink& sink = {});

GeoJsonExport cmd_export(const RunConfig& config, const DiagnosticSink& sink = {});

Panel load_panel_artifact(const std::filesystem::path& output_dir);

// ---------------------------------------------------------------------------
// Bundled sample data

struct SampleSpec {
  SynthSpec synth;
  std::size_t hospitals = 120;
};

/// 50 counties x 60 days of switching-regime data with mild noise, 120 hospitals.
SampleSpec default_sample_spec();

/// Writes a complete input set into `dir`: two overlapping death sources
/// (one with a dip, one conflicting value), static features, adjacency listed
/// one way, hospitals, grid-square county geometry and sample.ini.
void write_sample_dataset(const std::filesystem::path& dir, const SampleSpec& spec);

}  // namespace clepcast
