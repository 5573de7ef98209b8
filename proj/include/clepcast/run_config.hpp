#pragma once

// INI run configuration.
//
//   [run]
//   output   = out            ; relative paths resolve against the config file
//   horizons = 5,7,14
//   formats  = csv,json,geojson,html
//   policy   = running_max    ; or strict
//
//   [fit]       k_fit, log_shift, min_points
//   [ensemble]  mu, c, grace_days
//   [backtest]  start, end, mu, c, k_fit (comma lists form a grid)
//   [export]    geometry = counties.geojson
//
//   [source.usafacts]
//   kind     = deaths_cases   ; static_features | hospitals | adjacency
//   path     = deaths.csv
//   priority = 2

#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "clepcast/clep.hpp"
#include "clepcast/core.hpp"
#include "clepcast/ingest.hpp"
#include "clepcast/predictors.hpp"

namespace clepcast {

inline const std::set<std::string> kKnownFormats = {"csv", "json", "geojson", "html"};

struct BacktestSettings {
  std::optional<Day> start;
  std::optional<Day> end;
  std::vector<double> mus;
  std::vector<double> cs;
  std::vector<std::size_t> k_fits;
};

struct RunConfig {
  std::vector<SourceDescriptor> sources;
  FitConfig fit;
  EnsembleConfig ensemble;
  std::vector<Horizon> horizons{Horizon(5), Horizon(7), Horizon(14)};
  std::filesystem::path output_dir = "out";
  std::set<std::string> formats = kKnownFormats;
  MonotoneFixPolicy policy = MonotoneFixPolicy::RunningMax;
  std::optional<std::filesystem::path> geometry;
  BacktestSettings backtest;

  std::vector<SourceDescriptor> sources_of(SourceKind kind) const;
  bool wants(std::string_view format) const { return formats.count(std::string(format)) != 0; }
  void validate() const;
};

RunConfig parse_run_config(std::string_view ini_text, const std::filesystem::path& base_dir);
RunConfig load_run_config(const std::filesystem::path& path);

std::vector<Horizon> parse_horizon_list(std::string_view text);
std::set<std::string> parse_format_list(std::string_view text);

}  // namespace clepcast
