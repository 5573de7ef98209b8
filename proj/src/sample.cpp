#include <fstream>
#include <random>

#include <json.hpp>

#include "clepcast/ingest.hpp"
#include "clepcast/pipeline.hpp"

namespace clepcast {

namespace fs = std::filesystem;

namespace {

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::Io, "cannot write " + path.string());
  out << text;
  if (!out) throw Error(ErrorKind::Io, "write failed for " + path.string());
}

constexpr const char* kSampleIni = R"([run]
output   = out
horizons = 5,7,14
formats  = csv,json,geojson,html
policy   = running_max

[fit]
k_fit      = 7
log_shift  = 1
min_points = 3

[ensemble]
mu         = 0.5
c          = 1
grace_days = 2

[export]
geometry = counties.geojson

[source.primary]
kind     = deaths_cases
path     = deaths_primary.csv
priority = 2

[source.secondary]
kind     = deaths_cases
path     = deaths_secondary.csv
priority = 1

[source.features]
kind = static_features
path = features.csv

[source.adjacency]
kind = adjacency
path = adjacency.csv

[source.hospitals]
kind = hospitals
path = hospitals.csv
)";

}  // namespace

SampleSpec default_sample_spec() {
  SampleSpec spec;
  spec.synth.regime = Regime::Switching;
  spec.synth.counties = 50;
  spec.synth.days = 60;
  spec.synth.sigma = 0.02;
  spec.synth.seed = 2020;
  spec.hospitals = 120;
  return spec;
}

void write_sample_dataset(const fs::path& dir, const SampleSpec& spec) {
  spec.synth.validate();
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorKind::Io, "cannot create " + dir.string() + ": " + ec.message());

  const Panel truth = generate_synthetic(spec.synth);
  const auto counties = truth.counties();
  const std::size_t n = counties.size();
  const std::size_t days = truth.num_days();

  // Primary source: every county, a reporting dip in the first county and
  // the last two days missing for the final three counties.
  std::vector<DaySeries> primary;
  for (std::size_t i = 0; i < n; ++i) {
    DaySeries s = truth.at(counties[i]);
    if (i == 0 && days > 31 && s.cum_deaths[29] >= 2) s.cum_deaths[30] = s.cum_deaths[29] - 2;
    if (i + 3 >= n && days > 2) s.cum_deaths.resize(days - 2);
    primary.push_back(std::move(s));
  }
  // Secondary source: the final five counties in full, one day disagreeing.
  std::vector<DaySeries> secondary;
  for (std::size_t i = n >= 5 ? n - 5 : 0; i < n; ++i) {
    DaySeries s = truth.at(counties[i]);
    if (secondary.empty() && days > 41) {
      for (std::size_t t = 40; t < days; ++t) s.cum_deaths[t] += 2;
    }
    secondary.push_back(std::move(s));
  }
  write_text(dir / "deaths_primary.csv", write_counties_csv(primary));
  write_text(dir / "deaths_secondary.csv", write_counties_csv(secondary));

  write_text(dir / "features.csv", write_static_features_csv(truth.static_features()));

  // Each edge once; ingest symmetrizes it.
  std::vector<Edge> edges;
  for (const auto& [a, nbrs] : truth.adjacency()) {
    for (const auto& b : nbrs) {
      if (a < b) edges.emplace_back(a, b);
    }
  }
  write_text(dir / "adjacency.csv", write_adjacency_csv(edges));

  std::mt19937_64 rng(spec.synth.seed ^ 0x9e3779b97f4a7c15ULL);
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  std::uniform_int_distribution<std::int64_t> employees(50, 5000);
  std::uniform_int_distribution<std::int64_t> beds(0, 60);
  std::vector<Hospital> hospitals;
  for (std::size_t i = 0; i < spec.hospitals; ++i) {
    char id[16];
    std::snprintf(id, sizeof id, "H%04zu", i + 1);
    const CountyId county = counties[pick(rng)];
    const auto e = employees(rng);
    hospitals.push_back({id, county, e, beds(rng)});
  }
  write_text(dir / "hospitals.csv", write_hospitals_csv(hospitals));

  // Grid of 0.5 degree squares, ten per row.
  nlohmann::json features_json = nlohmann::json::array();
  for (std::size_t i = 0; i < n; ++i) {
    const double lon = -100.0 + 0.5 * static_cast<double>(i % 10);
    const double lat = 40.0 - 0.5 * static_cast<double>(i / 10);
    nlohmann::json ring = nlohmann::json::array(
        {{lon, lat}, {lon + 0.5, lat}, {lon + 0.5, lat - 0.5}, {lon, lat - 0.5}, {lon, lat}});
    features_json.push_back({{"type", "Feature"},
                             {"properties", {{"GEOID", counties[i].fips()}, {"NAME", "County " + std::to_string(i + 1)}}},
                             {"geometry", {{"type", "Polygon"}, {"coordinates", nlohmann::json::array({ring})}}}});
  }
  write_text(dir / "counties.geojson",
             nlohmann::json{{"type", "FeatureCollection"}, {"features", features_json}}.dump() + "\n");
  write_text(dir / "sample.ini", kSampleIni);
}

}  // namespace clepcast
