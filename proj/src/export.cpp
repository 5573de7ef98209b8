#include "clepcast/export.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>

#include <json.hpp>

#include "clepcast/csv.hpp"

namespace clepcast {

using nlohmann::json;

namespace {

const std::vector<std::string> kForecastHeader = {"fips", "as_of", "horizon", "predictor", "value", "lower", "upper"};
const std::vector<std::string> kSeverityHeader = {"hospital_id", "fips",  "current_imputed", "predicted_imputed",
                                                  "icu_beds",    "score", "level"};

json parse_json(std::string_view text, std::string_view what) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::ParseError, std::string(what) + ": " + e.what());
  }
}

std::optional<CountyId> fips_of(const json& feature) {
  auto try_parse = [](const std::string& s) -> std::optional<CountyId> {
    if (!CountyId::is_valid(s)) return std::nullopt;
    return CountyId::parse(s);
  };
  auto as_text = [](const json& v) -> std::optional<std::string> {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_number_integer()) {
      char buf[16];
      std::snprintf(buf, sizeof buf, "%05lld", static_cast<long long>(v.get<std::int64_t>()));
      return std::string(buf);
    }
    return std::nullopt;
  };
  if (feature.contains("properties") && feature["properties"].is_object()) {
    const auto& p = feature["properties"];
    for (const char* key : {"fips", "FIPS", "GEOID"}) {
      if (p.contains(key)) {
        if (auto t = as_text(p[key])) {
          if (auto id = try_parse(*t)) return id;
        }
      }
    }
    if (p.contains("GEO_ID") && p["GEO_ID"].is_string()) {
      const auto s = p["GEO_ID"].get<std::string>();
      if (s.size() >= 5) {
        if (auto id = try_parse(s.substr(s.size() - 5))) return id;
      }
    }
  }
  if (feature.contains("id")) {
    if (auto t = as_text(feature["id"])) return try_parse(*t);
  }
  return std::nullopt;
}

int level_rank(SeverityLevel level) { return static_cast<int>(level); }

std::string html_escape(std::string_view s) {
  std::string out;
  for (char ch : s) {
    switch (ch) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += ch;
    }
  }
  return out;
}

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

const char* level_color(const std::optional<SeverityLevel>& level) {
  if (!level) return "#d9d9d9";
  switch (*level) {
    case SeverityLevel::Low: return "#a1d99b";
    case SeverityLevel::Medium: return "#fdae6b";
    case SeverityLevel::High: return "#de2d26";
  }
  return "#d9d9d9";
}

// Rings of a Polygon or MultiPolygon geometry; a Point becomes an empty list.
std::vector<const json*> rings_of(const json& geometry) {
  std::vector<const json*> rings;
  const auto type = geometry.value("type", "");
  if (type == "Polygon") {
    for (const auto& ring : geometry["coordinates"]) rings.push_back(&ring);
  } else if (type == "MultiPolygon") {
    for (const auto& poly : geometry["coordinates"]) {
      for (const auto& ring : poly) rings.push_back(&ring);
    }
  }
  return rings;
}

}  // namespace

std::vector<ForecastRow> forecast_rows(const std::map<CountyId, ClepForecast>& forecasts) {
  std::vector<ForecastRow> rows;
  rows.reserve(forecasts.size() * (kPredictorCount + 1));
  for (const auto& [county, f] : forecasts) {
    for (auto id : kAllPredictors) {
      rows.push_back({county, f.as_of, f.horizon.days(), std::string(tag(id)),
                      f.baselines[static_cast<std::size_t>(id)], std::nullopt, std::nullopt});
    }
    rows.push_back({county, f.as_of, f.horizon.days(), "clep", f.value, f.interval.lower, f.interval.upper});
  }
  return rows;
}

std::string write_forecasts_csv(std::span<const ForecastRow> rows) {
  std::string out = "fips,as_of,horizon,predictor,value,lower,upper\n";
  for (const auto& r : rows) {
    out += r.county.fips();
    out += ',' + format_date(r.as_of) + ',' + std::to_string(r.horizon) + ',' + r.predictor + ',' +
           csv::format_double(r.value) + ',';
    if (r.lower) out += csv::format_double(*r.lower);
    out += ',';
    if (r.upper) out += csv::format_double(*r.upper);
    out += '\n';
  }
  return out;
}

std::vector<ForecastRow> parse_forecasts_csv(std::string_view text) {
  const auto table = csv::parse(text);
  csv::require_header(table, {kForecastHeader}, "forecasts.csv");
  std::vector<ForecastRow> rows;
  rows.reserve(table.rows.size());
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const auto& f = table.rows[i];
    const auto line = table.lines[i];
    if (f.size() != kForecastHeader.size()) {
      throw Error(ErrorKind::ParseError, "forecasts.csv line " + std::to_string(line) + ": wrong field count", line);
    }
    if (!CountyId::is_valid(f[0])) {
      throw Error(ErrorKind::BadFips, "forecasts.csv line " + std::to_string(line) + ": bad fips '" + f[0] + "'", line);
    }
    ForecastRow r{CountyId::parse(f[0]),
                  parse_date(f[1]),
                  static_cast<int>(csv::parse_int(f[2], line, "horizon")),
                  f[3],
                  csv::parse_double(f[4], line, "value"),
                  std::nullopt,
                  std::nullopt};
    if (!f[5].empty()) r.lower = csv::parse_double(f[5], line, "lower");
    if (!f[6].empty()) r.upper = csv::parse_double(f[6], line, "upper");
    rows.push_back(std::move(r));
  }
  return rows;
}

std::string write_severity_csv(std::span<const SeverityRecord> records) {
  std::string out = "hospital_id,fips,current_imputed,predicted_imputed,icu_beds,score,level\n";
  for (const auto& r : records) {
    out += csv::escape(r.hospital_id) + ',' + r.county.fips() + ',' + csv::format_double(r.current_imputed) + ',' +
           csv::format_double(r.predicted_imputed) + ',' + std::to_string(r.icu_beds) + ',' +
           std::to_string(r.total) + ',' + std::string(to_string(r.level)) + '\n';
  }
  return out;
}

std::vector<SeverityRow> parse_severity_csv(std::string_view text) {
  const auto table = csv::parse(text);
  csv::require_header(table, {kSeverityHeader}, "severity.csv");
  std::vector<SeverityRow> rows;
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const auto& f = table.rows[i];
    const auto line = table.lines[i];
    if (f.size() != kSeverityHeader.size()) {
      throw Error(ErrorKind::ParseError, "severity.csv line " + std::to_string(line) + ": wrong field count", line);
    }
    if (!CountyId::is_valid(f[1])) {
      throw Error(ErrorKind::BadFips, "severity.csv line " + std::to_string(line) + ": bad fips '" + f[1] + "'", line);
    }
    rows.push_back({f[0], CountyId::parse(f[1]), severity_level_from_string(f[6])});
  }
  return rows;
}

std::vector<CountyMapEntry> map_entries(std::span<const ForecastRow> rows, int horizon,
                                        std::span<const SeverityRow> severity) {
  std::map<CountyId, SeverityLevel> worst;
  for (const auto& s : severity) {
    auto [it, inserted] = worst.emplace(s.county, s.level);
    if (!inserted && level_rank(s.level) > level_rank(it->second)) it->second = s.level;
  }
  std::vector<CountyMapEntry> out;
  for (const auto& r : rows) {
    if (r.horizon != horizon || r.predictor != "clep") continue;
    CountyMapEntry e{r.county, r.as_of, r.horizon, r.value, r.lower.value_or(r.value), r.upper.value_or(r.value),
                     std::nullopt, {}};
    if (auto it = worst.find(r.county); it != worst.end()) e.level = it->second;
    out.push_back(std::move(e));
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.county < b.county; });
  return out;
}

std::optional<CountyId> feature_fips(std::string_view feature_json) {
  return fips_of(parse_json(feature_json, "feature"));
}

GeoJsonExport build_geojson(std::string_view geometry_text, std::span<const CountyMapEntry> entries) {
  const json geo = parse_json(geometry_text, "geometry file");
  if (!geo.is_object() || geo.value("type", "") != "FeatureCollection" || !geo.contains("features") ||
      !geo["features"].is_array()) {
    throw Error(ErrorKind::SchemaMismatch, "geometry file is not a GeoJSON FeatureCollection");
  }
  std::map<CountyId, const json*> shapes;
  for (const auto& feature : geo["features"]) {
    if (!feature.is_object() || !feature.contains("geometry")) continue;
    if (auto id = fips_of(feature)) shapes.emplace(*id, &feature["geometry"]);
  }

  GeoJsonExport out;
  json features = json::array();
  for (const auto& e : entries) {
    auto it = shapes.find(e.county);
    if (it == shapes.end()) {
      out.missing_geometry.push_back(e.county);
      continue;
    }
    json props{{"fips", e.county.fips()}, {"clep", e.clep}, {"lower", e.lower}, {"upper", e.upper}};
    props["level"] = e.level ? json(std::string(to_string(*e.level))) : json(nullptr);
    features.push_back({{"type", "Feature"}, {"id", e.county.fips()}, {"geometry", *it->second}, {"properties", props}});
  }
  out.features = features.size();
  json doc{{"type", "FeatureCollection"}, {"features", std::move(features)}};
  out.text = doc.dump() + "\n";
  return out;
}

std::string build_html_report(std::string_view geojson_text, std::span<const CountyMapEntry> entries) {
  const json geo = parse_json(geojson_text, "map data");

  double min_x = std::numeric_limits<double>::infinity(), max_x = -min_x;
  double min_y = min_x, max_y = -min_x;
  auto extend = [&](const json& pt) {
    const double x = pt.at(0).get<double>();
    const double y = pt.at(1).get<double>();
    min_x = std::min(min_x, x);
    max_x = std::max(max_x, x);
    min_y = std::min(min_y, y);
    max_y = std::max(max_y, y);
  };
  for (const auto& f : geo["features"]) {
    const auto& g = f["geometry"];
    if (g.value("type", "") == "Point") extend(g["coordinates"]);
    for (const json* ring : rings_of(g)) {
      for (const auto& pt : *ring) extend(pt);
    }
  }

  const double width = 800.0;
  const double pad = 10.0;
  const bool has_extent = min_x <= max_x;
  const double mid_lat = has_extent ? 0.5 * (min_y + max_y) : 0.0;
  const double x_scale = std::cos(mid_lat * std::numbers::pi / 180.0);
  const double span_x = has_extent ? std::max((max_x - min_x) * x_scale, 1e-9) : 1.0;
  const double span_y = has_extent ? std::max(max_y - min_y, 1e-9) : 1.0;
  const double scale = (width - 2 * pad) / span_x;
  const double height = span_y * scale + 2 * pad;
  auto px = [&](double x) { return fixed(pad + (x - min_x) * x_scale * scale, 2); };
  auto py = [&](double y) { return fixed(pad + (max_y - y) * scale, 2); };

  std::map<std::string, const CountyMapEntry*> by_fips;
  for (const auto& e : entries) by_fips[e.county.fips()] = &e;

  std::string svg = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fixed(width, 0) + "\" height=\"" +
                    fixed(height, 0) + "\" viewBox=\"0 0 " + fixed(width, 0) + ' ' + fixed(height, 0) + "\">\n";
  for (const auto& f : geo["features"]) {
    const auto& p = f["properties"];
    const std::string fips = p.value("fips", "");
    std::optional<SeverityLevel> level;
    if (p.contains("level") && p["level"].is_string()) level = severity_level_from_string(p["level"].get<std::string>());
    std::string title = fips;
    if (auto it = by_fips.find(fips); it != by_fips.end()) {
      title += ": " + fixed(it->second->clep, 1) + " [" + fixed(it->second->lower, 1) + ", " +
               fixed(it->second->upper, 1) + "]";
    }
    const auto& g = f["geometry"];
    if (g.value("type", "") == "Point") {
      svg += "<circle cx=\"" + px(g["coordinates"][0].get<double>()) + "\" cy=\"" +
             py(g["coordinates"][1].get<double>()) + "\" r=\"5\" fill=\"" + level_color(level) +
             "\" stroke=\"#555\"><title>" + html_escape(title) + "</title></circle>\n";
      continue;
    }
    std::string d;
    for (const json* ring : rings_of(g)) {
      bool first = true;
      for (const auto& pt : *ring) {
        d += first ? 'M' : 'L';
        d += px(pt[0].get<double>()) + ',' + py(pt[1].get<double>()) + ' ';
        first = false;
      }
      d += "Z ";
    }
    svg += "<path d=\"" + d + "\" fill=\"" + level_color(level) + "\" stroke=\"#555\" stroke-width=\"0.5\"><title>" +
           html_escape(title) + "</title></path>\n";
  }
  svg += "</svg>\n";

  json data = json::array();
  for (const auto& e : entries) {
    data.push_back({{"fips", e.county.fips()},
                    {"as_of", format_date(e.as_of)},
                    {"horizon", e.horizon},
                    {"clep", e.clep},
                    {"lower", e.lower},
                    {"upper", e.upper},
                    {"level", e.level ? json(std::string(to_string(*e.level))) : json(nullptr)},
                    {"weights", e.weights}});
  }
  std::string inline_data = data.dump();
  for (std::size_t pos = 0; (pos = inline_data.find("</", pos)) != std::string::npos; pos += 3) {
    inline_data.replace(pos, 2, "<\\/");
  }

  std::string rows;
  for (const auto& e : entries) {
    rows += "<tr><td>" + e.county.fips() + "</td><td>" + (e.level ? std::string(to_string(*e.level)) : "n/a") +
            "</td><td>" + fixed(e.clep, 2) + "</td><td>" + fixed(e.lower, 2) + "</td><td>" + fixed(e.upper, 2) +
            "</td>";
    for (std::size_t m = 0; m < kPredictorCount; ++m) {
      rows += "<td>" + (m < e.weights.size() ? fixed(e.weights[m], 4) : std::string("")) + "</td>";
    }
    rows += "</tr>\n";
  }

  const std::string as_of = entries.empty() ? std::string("n/a") : format_date(entries.front().as_of);
  const std::string horizon = entries.empty() ? std::string("n/a") : std::to_string(entries.front().horizon);
  std::string html;
  html += "<!DOCTYPE html>\n<html lang=\"en\">\n<head>\n<meta charset=\"utf-8\">\n";
  html += "<title>County death forecasts, " + as_of + "</title>\n";
  html += "<style>\nbody{font-family:sans-serif;margin:1.5em;color:#222}\n"
          "table{border-collapse:collapse;font-size:0.85em}\n"
          "td,th{border:1px solid #ccc;padding:2px 6px;text-align:right}\n"
          ".legend span{display:inline-block;width:1em;height:1em;margin:0 0.3em 0 1em;vertical-align:middle}\n"
          "</style>\n</head>\n<body>\n";
  html += "<h1>County death forecasts</h1>\n<p>Issued " + as_of + ", horizon " + horizon +
          " days. Intervals are maximum-error prediction intervals; colour is the most severe hospital level in "
          "the county.</p>\n";
  html += "<p class=\"legend\"><span style=\"background:#a1d99b\"></span>low<span style=\"background:#fdae6b\"></span>"
          "medium<span style=\"background:#de2d26\"></span>high<span style=\"background:#d9d9d9\"></span>no hospitals"
          "</p>\n";
  html += svg;
  html += "<h2>Forecasts, intervals and ensemble weights</h2>\n<table>\n<thead><tr><th>fips</th><th>level</th>"
          "<th>clep</th><th>lower</th><th>upper</th>";
  for (auto id : kAllPredictors) html += "<th>w " + std::string(tag(id)) + "</th>";
  html += "</tr></thead>\n<tbody>\n" + rows + "</tbody>\n</table>\n";
  html += "<script type=\"application/json\" id=\"forecast-data\">" + inline_data + "</script>\n";
  html += "</body>\n</html>\n";
  return html;
}

}  // namespace clepcast
