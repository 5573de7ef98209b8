#pragma once

// File-based loading, merging and cleaning of county inputs.
//
// Table formats (UTF-8, header row required, headers matched exactly):
//   deaths_cases     fips,date,cum_deaths[,cum_cases]
//   static_features  fips,feature,value
//   hospitals        hospital_id,fips,employees,icu_beds
//   adjacency        fips_a,fips_b

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "clepcast/core.hpp"

namespace clepcast {

enum class SourceKind { DeathsCases, StaticFeatures, Hospitals, Adjacency };

std::string_view to_string(SourceKind kind) noexcept;
SourceKind source_kind_from_string(std::string_view name);

struct SourceDescriptor {
  std::string name;
  std::string path;  // local file; http(s):// locations are declared but not fetched
  SourceKind kind = SourceKind::DeathsCases;
  int priority = 0;  // higher wins on conflict
};

/// Reads the raw bytes behind a descriptor. Only the file backend exists;
/// URL locations raise UnsupportedSource so callers can swap in fixtures.
std::string fetch(const SourceDescriptor& desc);

/// Where a value in a loaded series came from. line == 0 marks a value
/// synthesized by a logged fill repair.
struct Origin {
  std::string source;
  std::int64_t line = 0;

  bool operator==(const Origin&) const = default;
};

struct TracedSeries {
  DaySeries series;
  std::vector<Origin> origin;  // one per day
};

struct LoadedCounties {
  std::string source;
  int priority = 0;
  std::vector<TracedSeries> series;  // ordered by FIPS
  std::vector<RepairRecord> repairs;
};

LoadedCounties parse_counties(std::string_view csv_text, const SourceDescriptor& desc,
                              MonotoneFixPolicy policy = MonotoneFixPolicy::RunningMax);
LoadedCounties load_counties(const SourceDescriptor& desc,
                             MonotoneFixPolicy policy = MonotoneFixPolicy::RunningMax);

struct MergeDecision {
  CountyId county;
  Day day = 0;
  std::string kept_source;
  std::int64_t kept = 0;
  std::string dropped_source;
  std::int64_t dropped = 0;
};

struct MergeResult {
  std::vector<TracedSeries> series;  // ordered by FIPS
  std::vector<MergeDecision> conflicts;
  std::vector<RepairRecord> repairs;  // gap fills and re-cleaning after the merge
};

/// Per (county, day) the source with the higher priority wins. Priorities
/// must be distinct.
MergeResult merge_sources(std::vector<LoadedCounties> sources,
                          MonotoneFixPolicy policy = MonotoneFixPolicy::RunningMax);
MergeResult merge_sources(const LoadedCounties& primary, const LoadedCounties& secondary,
                          MonotoneFixPolicy policy = MonotoneFixPolicy::RunningMax);

using StaticFeatures = std::map<CountyId, FeatureMap>;
using Edge = std::pair<CountyId, CountyId>;

StaticFeatures parse_static_features(std::string_view csv_text, const SourceDescriptor& desc);
StaticFeatures load_static_features(const SourceDescriptor& desc);

std::vector<Edge> parse_adjacency(std::string_view csv_text, const SourceDescriptor& desc);
std::vector<Edge> load_adjacency(const SourceDescriptor& desc);

struct Warning {
  std::string code;
  std::string message;
};

struct PanelBuild {
  Panel panel;
  std::vector<Warning> warnings;
};

/// Aligns all series to the union calendar (zero-filled heads, forward-filled
/// tails), symmetrizes adjacency and validates orphans.
PanelBuild build_panel(std::vector<DaySeries> series, StaticFeatures static_features,
                       std::vector<Edge> adjacency, std::vector<RepairRecord> carried_repairs = {});

struct Hospital {
  std::string id;
  CountyId county;
  std::int64_t employees = 1;
  std::int64_t icu_beds = 0;
};

std::vector<Hospital> parse_hospitals(std::string_view csv_text, const SourceDescriptor& desc,
                                      const Panel& panel);
std::vector<Hospital> load_hospitals(const SourceDescriptor& desc, const Panel& panel);

// Writers for the same table formats; reading their output gives back the input.
std::string write_counties_csv(const std::vector<DaySeries>& series);
std::string write_static_features_csv(const StaticFeatures& features);
std::string write_adjacency_csv(const std::vector<Edge>& edges);
std::string write_hospitals_csv(const std::vector<Hospital>& hospitals);

}  // namespace clepcast
