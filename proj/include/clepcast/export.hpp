#pragma once

// Output tables and map/report rendering.
//
//   forecasts.csv  fips,as_of,horizon,predictor,value,lower,upper
//                  predictor in p1..p5, clep; lower/upper only on clep rows
//   severity.csv   hospital_id,fips,current_imputed,predicted_imputed,icu_beds,score,level

#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "clepcast/core.hpp"
#include "clepcast/engine.hpp"
#include "clepcast/severity.hpp"

namespace clepcast {

struct ForecastRow {
  CountyId county;
  Day as_of = 0;
  int horizon = 0;
  std::string predictor;
  double value = 0.0;
  std::optional<double> lower;
  std::optional<double> upper;
};

/// Six rows per (county, horizon): the five baselines then clep.
std::vector<ForecastRow> forecast_rows(const std::map<CountyId, ClepForecast>& forecasts);

std::string write_forecasts_csv(std::span<const ForecastRow> rows);
std::vector<ForecastRow> parse_forecasts_csv(std::string_view text);

std::string write_severity_csv(std::span<const SeverityRecord> records);

struct SeverityRow {
  std::string hospital_id;
  CountyId county;
  SeverityLevel level = SeverityLevel::Low;
};
std::vector<SeverityRow> parse_severity_csv(std::string_view text);

/// What one map feature shows.
struct CountyMapEntry {
  CountyId county;
  Day as_of = 0;
  int horizon = 0;
  double clep = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  std::optional<SeverityLevel> level;  // most severe hospital level in the county
  std::vector<double> weights;         // p1..p5 when an ensemble state is available
};

/// Clep rows of one horizon joined with the most severe hospital level per county.
std::vector<CountyMapEntry> map_entries(std::span<const ForecastRow> rows, int horizon,
                                        std::span<const SeverityRow> severity);

/// FIPS of a county-boundary feature: properties.fips, properties.GEOID,
/// the last five characters of properties.GEO_ID, or the feature id.
std::optional<CountyId> feature_fips(std::string_view feature_json);

struct GeoJsonExport {
  std::string text;
  std::size_t features = 0;
  std::vector<CountyId> missing_geometry;  // entries skipped for lack of a shape
};

/// FeatureCollection with one feature per entry that has geometry, carrying
/// properties {fips, clep, lower, upper, level}.
GeoJsonExport build_geojson(std::string_view geometry_text, std::span<const CountyMapEntry> entries);

/// Self-contained page: inline data, an SVG choropleth and weight/interval tables.
std::string build_html_report(std::string_view geojson_text, std::span<const CountyMapEntry> entries);

}  // namespace clepcast
