#include "clepcast/ingest.hpp"

#include <algorithm>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>

#include "clepcast/csv.hpp"

namespace clepcast {

namespace {

const std::vector<std::string> kDeathsHeader = {"fips", "date", "cum_deaths"};
const std::vector<std::string> kDeathsCasesHeader = {"fips", "date", "cum_deaths", "cum_cases"};
const std::vector<std::string> kFeaturesHeader = {"fips", "feature", "value"};
const std::vector<std::string> kHospitalsHeader = {"hospital_id", "fips", "employees", "icu_beds"};
const std::vector<std::string> kAdjacencyHeader = {"fips_a", "fips_b"};

CountyId county_at(std::string_view fips, std::int64_t line, std::string_view source) {
  if (!CountyId::is_valid(fips)) {
    throw Error(ErrorKind::BadFips,
                std::string(source) + " line " + std::to_string(line) + ": invalid FIPS '" + std::string(fips) + "'",
                line);
  }
  return CountyId::parse(fips);
}

Day date_at(std::string_view iso, std::int64_t line, std::string_view source) {
  try {
    return parse_date(iso);
  } catch (const Error&) {
    throw Error(ErrorKind::ParseError,
                std::string(source) + " line " + std::to_string(line) + ", column date: invalid date '" +
                    std::string(iso) + "'",
                line);
  }
}

void require_width(const csv::Table& t, std::size_t row, std::string_view source) {
  if (t.rows[row].size() != t.header.size()) {
    throw Error(ErrorKind::ParseError,
                std::string(source) + " line " + std::to_string(t.lines[row]) + ": expected " +
                    std::to_string(t.header.size()) + " fields, found " + std::to_string(t.rows[row].size()),
                t.lines[row]);
  }
}

struct RawRow {
  std::int64_t deaths;
  std::optional<std::int64_t> cases;
  std::int64_t line;
};

// Expands sparse per-day rows to a dense run, forward-filling interior gaps.
std::vector<std::int64_t> densify(const std::map<Day, RawRow>& rows, bool cases, const std::string& source,
                                  const CountyId& county, std::vector<RepairRecord>& repairs,
                                  std::vector<Origin>* origin) {
  const Day first = rows.begin()->first;
  const Day last = rows.rbegin()->first;
  std::vector<std::int64_t> out;
  out.reserve(static_cast<std::size_t>(last - first + 1));
  auto it = rows.begin();
  std::int64_t previous = 0;
  for (Day d = first; d <= last; ++d) {
    if (it != rows.end() && it->first == d) {
      previous = cases ? *it->second.cases : it->second.deaths;
      if (origin) origin->push_back({source, it->second.line});
      ++it;
    } else {
      repairs.push_back({source, county, d, cases ? "cum_cases" : "cum_deaths", RepairKind::ForwardFill,
                         std::nullopt, previous});
      if (origin) origin->push_back({source, 0});
    }
    out.push_back(previous);
  }
  return out;
}

std::vector<std::int64_t> clean(std::vector<std::int64_t> values, MonotoneFixPolicy policy, Day start,
                                const std::string& source, const CountyId& county, const std::string& column,
                                std::vector<RepairRecord>& repairs) {
  CleanResult cleaned;
  try {
    cleaned = validate_cumulative(values, policy);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::NegativeCount) throw;
    throw Error(ErrorKind::NegativeCount,
                source + ": negative " + column + " for " + county.fips() + " on " +
                    format_date(start + static_cast<Day>(e.index())),
                e.index());
  }
  for (const auto& r : cleaned.repairs) {
    repairs.push_back({source, county, start + static_cast<Day>(r.index), column, r.kind, r.old_value, r.new_value});
  }
  return std::move(cleaned.values);
}

}  // namespace

std::string_view to_string(SourceKind kind) noexcept {
  switch (kind) {
    case SourceKind::DeathsCases: return "deaths_cases";
    case SourceKind::StaticFeatures: return "static_features";
    case SourceKind::Hospitals: return "hospitals";
    case SourceKind::Adjacency: return "adjacency";
  }
  return "unknown";
}

SourceKind source_kind_from_string(std::string_view name) {
  if (name == "deaths_cases") return SourceKind::DeathsCases;
  if (name == "static_features") return SourceKind::StaticFeatures;
  if (name == "hospitals") return SourceKind::Hospitals;
  if (name == "adjacency") return SourceKind::Adjacency;
  throw Error(ErrorKind::InvalidArgument, "unknown source kind '" + std::string(name) + "'");
}

std::string fetch(const SourceDescriptor& desc) {
  if (desc.path.rfind("http://", 0) == 0 || desc.path.rfind("https://", 0) == 0) {
    throw Error(ErrorKind::UnsupportedSource,
                "source '" + desc.name + "': remote fetching is not implemented (" + desc.path + ")");
  }
  std::ifstream in(desc.path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "source '" + desc.name + "': cannot open " + desc.path);
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw Error(ErrorKind::Io, "source '" + desc.name + "': read failed for " + desc.path);
  return buf.str();
}

LoadedCounties parse_counties(std::string_view csv_text, const SourceDescriptor& desc, MonotoneFixPolicy policy) {
  const csv::Table table = csv::parse(csv_text);
  csv::require_header(table, {kDeathsHeader, kDeathsCasesHeader}, desc.name);
  const bool has_cases = table.header.size() == kDeathsCasesHeader.size();

  std::map<CountyId, std::map<Day, RawRow>> grouped;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    require_width(table, r, desc.name);
    const auto& row = table.rows[r];
    const std::int64_t line = table.lines[r];
    const CountyId county = county_at(row[0], line, desc.name);
    const Day day = date_at(row[1], line, desc.name);
    RawRow raw{csv::parse_int(row[2], line, "cum_deaths"), std::nullopt, line};
    if (has_cases) raw.cases = csv::parse_int(row[3], line, "cum_cases");
    auto [it, inserted] = grouped[county].emplace(day, raw);
    if (!inserted) {
      throw Error(ErrorKind::ParseError,
                  desc.name + " line " + std::to_string(line) + ": duplicate row for " + county.fips() + " on " +
                      std::string(row[1]),
                  line);
    }
  }

  LoadedCounties out;
  out.source = desc.name;
  out.priority = desc.priority;
  for (const auto& [county, rows] : grouped) {
    TracedSeries traced{DaySeries{county, rows.begin()->first, {}, std::nullopt}, {}};
    auto deaths = densify(rows, false, desc.name, county, out.repairs, &traced.origin);
    traced.series.cum_deaths = clean(std::move(deaths), policy, traced.series.start, desc.name, county,
                                     "cum_deaths", out.repairs);
    if (has_cases) {
      auto cases = densify(rows, true, desc.name, county, out.repairs, nullptr);
      traced.series.cum_cases =
          clean(std::move(cases), policy, traced.series.start, desc.name, county, "cum_cases", out.repairs);
    }
    out.series.push_back(std::move(traced));
  }
  return out;
}

LoadedCounties load_counties(const SourceDescriptor& desc, MonotoneFixPolicy policy) {
  return parse_counties(fetch(desc), desc, policy);
}

MergeResult merge_sources(std::vector<LoadedCounties> sources, MonotoneFixPolicy policy) {
  std::stable_sort(sources.begin(), sources.end(),
                   [](const LoadedCounties& a, const LoadedCounties& b) { return a.priority > b.priority; });
  for (std::size_t i = 1; i < sources.size(); ++i) {
    if (sources[i].priority == sources[i - 1].priority) {
      throw Error(ErrorKind::InvalidArgument, "sources '" + sources[i - 1].source + "' and '" + sources[i].source +
                                                  "' share priority " + std::to_string(sources[i].priority));
    }
  }

  // county -> candidates in descending priority
  std::map<CountyId, std::vector<const TracedSeries*>> by_county;
  std::map<const TracedSeries*, const LoadedCounties*> owner;
  for (const auto& src : sources) {
    for (const auto& ts : src.series) {
      by_county[ts.series.county].push_back(&ts);
      owner[&ts] = &src;
    }
  }

  MergeResult out;
  for (const auto& [county, candidates] : by_county) {
    if (candidates.size() == 1) {
      out.series.push_back(*candidates.front());
      continue;
    }
    Day first = candidates.front()->series.start;
    Day last = candidates.front()->series.end();
    bool cases_everywhere = true;
    for (const auto* c : candidates) {
      first = std::min(first, c->series.start);
      last = std::max(last, c->series.end());
    }

    TracedSeries merged{DaySeries{county, first, {}, std::vector<std::int64_t>{}}, {}};
    for (Day d = first; d <= last; ++d) {
      const TracedSeries* winner = nullptr;
      for (const auto* c : candidates) {
        if (d < c->series.start || d > c->series.end()) continue;
        const auto idx = static_cast<std::size_t>(d - c->series.start);
        if (!winner) {
          winner = c;
          merged.series.cum_deaths.push_back(c->series.cum_deaths[idx]);
          merged.origin.push_back(c->origin[idx]);
          if (c->series.cum_cases) {
            merged.series.cum_cases->push_back((*c->series.cum_cases)[idx]);
          } else {
            cases_everywhere = false;
          }
          continue;
        }
        const auto widx = static_cast<std::size_t>(d - winner->series.start);
        if (c->series.cum_deaths[idx] != winner->series.cum_deaths[widx]) {
          out.conflicts.push_back({county, d, owner.at(winner)->source, winner->series.cum_deaths[widx],
                                   owner.at(c)->source, c->series.cum_deaths[idx]});
        }
      }
      if (!winner) {
        throw Error(ErrorKind::CalendarMismatch, "county " + county.fips() + " has no source covering " +
                                                     format_date(d) + "; date ranges cannot be aligned");
      }
    }
    if (!cases_everywhere) merged.series.cum_cases.reset();
    merged.series.cum_deaths =
        clean(std::move(merged.series.cum_deaths), policy, first, "merge", county, "cum_deaths", out.repairs);
    if (merged.series.cum_cases) {
      merged.series.cum_cases =
          clean(std::move(*merged.series.cum_cases), policy, first, "merge", county, "cum_cases", out.repairs);
    }
    out.series.push_back(std::move(merged));
  }
  return out;
}

MergeResult merge_sources(const LoadedCounties& primary, const LoadedCounties& secondary, MonotoneFixPolicy policy) {
  return merge_sources(std::vector<LoadedCounties>{primary, secondary}, policy);
}

StaticFeatures parse_static_features(std::string_view csv_text, const SourceDescriptor& desc) {
  const csv::Table table = csv::parse(csv_text);
  csv::require_header(table, {kFeaturesHeader}, desc.name);
  StaticFeatures out;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    require_width(table, r, desc.name);
    const auto& row = table.rows[r];
    const std::int64_t line = table.lines[r];
    const CountyId county = county_at(row[0], line, desc.name);
    if (row[1].empty()) {
      throw Error(ErrorKind::ParseError, desc.name + " line " + std::to_string(line) + ": empty feature name", line);
    }
    if (!out[county].emplace(row[1], csv::parse_double(row[2], line, "value")).second) {
      throw Error(ErrorKind::ParseError,
                  desc.name + " line " + std::to_string(line) + ": duplicate feature " + row[1] + " for " +
                      county.fips(),
                  line);
    }
  }
  return out;
}

StaticFeatures load_static_features(const SourceDescriptor& desc) {
  return parse_static_features(fetch(desc), desc);
}

std::vector<Edge> parse_adjacency(std::string_view csv_text, const SourceDescriptor& desc) {
  const csv::Table table = csv::parse(csv_text);
  csv::require_header(table, {kAdjacencyHeader}, desc.name);
  std::vector<Edge> out;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    require_width(table, r, desc.name);
    out.emplace_back(county_at(table.rows[r][0], table.lines[r], desc.name),
                     county_at(table.rows[r][1], table.lines[r], desc.name));
  }
  return out;
}

std::vector<Edge> load_adjacency(const SourceDescriptor& desc) { return parse_adjacency(fetch(desc), desc); }

PanelBuild build_panel(std::vector<DaySeries> series, StaticFeatures static_features, std::vector<Edge> adjacency,
                       std::vector<RepairRecord> carried_repairs) {
  if (series.empty()) throw Error(ErrorKind::InvalidArgument, "cannot build a panel without county series");

  Day first = series.front().start;
  Day last = series.front().end();
  for (const auto& s : series) {
    if (s.cum_deaths.empty()) throw Error(ErrorKind::InvalidArgument, "empty series for " + s.county.fips());
    first = std::min(first, s.start);
    last = std::max(last, s.end());
  }
  const auto num_days = static_cast<std::size_t>(last - first + 1);

  std::vector<RepairRecord> provenance = std::move(carried_repairs);
  std::map<CountyId, DaySeries> aligned;
  auto align = [&](const DaySeries& s, const std::vector<std::int64_t>& values, const std::string& column) {
    std::vector<std::int64_t> out(num_days, 0);
    const auto offset = static_cast<std::size_t>(s.start - first);
    for (std::size_t i = 0; i < offset; ++i) {
      provenance.push_back({"build_panel", s.county, first + static_cast<Day>(i), column, RepairKind::ZeroFill,
                            std::nullopt, 0});
    }
    std::copy(values.begin(), values.end(), out.begin() + static_cast<std::ptrdiff_t>(offset));
    for (std::size_t i = offset + values.size(); i < num_days; ++i) {
      out[i] = values.back();
      provenance.push_back({"build_panel", s.county, first + static_cast<Day>(i), column, RepairKind::ForwardFill,
                            std::nullopt, values.back()});
    }
    return out;
  };

  for (auto& s : series) {
    DaySeries a{s.county, first, align(s, s.cum_deaths, "cum_deaths"), std::nullopt};
    if (s.cum_cases) a.cum_cases = align(s, *s.cum_cases, "cum_cases");
    if (!aligned.emplace(s.county, std::move(a)).second) {
      throw Error(ErrorKind::InvalidArgument, "duplicate series for county " + s.county.fips());
    }
  }

  std::vector<Warning> warnings;
  for (const auto& [county, _] : static_features) {
    if (!aligned.count(county)) {
      throw Error(ErrorKind::OrphanCounty, "static features reference county " + county.fips() + " with no series");
    }
  }

  std::set<Edge> listed;
  std::map<CountyId, std::set<CountyId>> adj;
  std::size_t self_loops = 0;
  for (const auto& [a, b] : adjacency) {
    for (const auto* c : {&a, &b}) {
      if (!aligned.count(*c)) {
        throw Error(ErrorKind::OrphanCounty, "adjacency references county " + c->fips() + " with no series");
      }
    }
    if (a == b) {
      ++self_loops;
      continue;
    }
    listed.insert({a, b});
    adj[a].insert(b);
    adj[b].insert(a);
  }
  std::size_t one_way = 0;
  std::string example;
  for (const auto& [a, b] : listed) {
    if (!listed.count({b, a})) {
      if (example.empty()) example = a.fips() + "->" + b.fips();
      ++one_way;
    }
  }
  if (one_way > 0) {
    warnings.push_back({"AsymmetricAdjacency", std::to_string(one_way) +
                                                   " adjacency edge(s) listed in one direction only (e.g. " +
                                                   example + "); symmetrized"});
  }
  if (self_loops > 0) {
    warnings.push_back({"SelfAdjacency", std::to_string(self_loops) + " self-adjacency edge(s) ignored"});
  }

  return PanelBuild{Panel(first, num_days, std::move(aligned), std::move(static_features), std::move(adj),
                          std::move(provenance)),
                    std::move(warnings)};
}

std::vector<Hospital> parse_hospitals(std::string_view csv_text, const SourceDescriptor& desc, const Panel& panel) {
  const csv::Table table = csv::parse(csv_text);
  csv::require_header(table, {kHospitalsHeader}, desc.name);
  std::vector<Hospital> out;
  std::set<std::string> seen;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    require_width(table, r, desc.name);
    const auto& row = table.rows[r];
    const std::int64_t line = table.lines[r];
    if (row[0].empty()) {
      throw Error(ErrorKind::ParseError, desc.name + " line " + std::to_string(line) + ": empty hospital_id", line);
    }
    Hospital h{row[0], county_at(row[1], line, desc.name), csv::parse_int(row[2], line, "employees"),
               csv::parse_int(row[3], line, "icu_beds")};
    if (!seen.insert(h.id).second) {
      throw Error(ErrorKind::DuplicateHospital, "duplicate hospital id '" + h.id + "'", line);
    }
    if (h.employees < 1) {
      throw Error(ErrorKind::NonPositiveEmployees,
                  "hospital '" + h.id + "' has non-positive employee count " + std::to_string(h.employees), line);
    }
    if (h.icu_beds < 0) {
      throw Error(ErrorKind::ParseError, "hospital '" + h.id + "' has negative icu_beds", line);
    }
    if (!panel.contains(h.county)) {
      throw Error(ErrorKind::UnknownCounty, "hospital '" + h.id + "' is in county " + h.county.fips() +
                                                " which is not in the panel",
                  line);
    }
    out.push_back(std::move(h));
  }
  return out;
}

std::vector<Hospital> load_hospitals(const SourceDescriptor& desc, const Panel& panel) {
  return parse_hospitals(fetch(desc), desc, panel);
}

std::string write_counties_csv(const std::vector<DaySeries>& series) {
  const bool cases = !series.empty() && std::all_of(series.begin(), series.end(),
                                                    [](const DaySeries& s) { return s.cum_cases.has_value(); });
  std::string out = cases ? "fips,date,cum_deaths,cum_cases\n" : "fips,date,cum_deaths\n";
  for (const auto& s : series) {
    for (std::size_t i = 0; i < s.size(); ++i) {
      out += s.county.fips() + ',' + format_date(s.start + static_cast<Day>(i)) + ',' +
             std::to_string(s.cum_deaths[i]);
      if (cases) out += ',' + std::to_string((*s.cum_cases)[i]);
      out += '\n';
    }
  }
  return out;
}

std::string write_static_features_csv(const StaticFeatures& features) {
  std::string out = "fips,feature,value\n";
  for (const auto& [county, fmap] : features) {
    for (const auto& [name, value] : fmap) {
      out += county.fips() + ',' + csv::escape(name) + ',' + csv::format_double(value) + '\n';
    }
  }
  return out;
}

std::string write_adjacency_csv(const std::vector<Edge>& edges) {
  std::string out = "fips_a,fips_b\n";
  for (const auto& [a, b] : edges) out += a.fips() + ',' + b.fips() + '\n';
  return out;
}

std::string write_hospitals_csv(const std::vector<Hospital>& hospitals) {
  std::string out = "hospital_id,fips,employees,icu_beds\n";
  for (const auto& h : hospitals) {
    out += csv::escape(h.id) + ',' + h.county.fips() + ',' + std::to_string(h.employees) + ',' +
           std::to_string(h.icu_beds) + '\n';
  }
  return out;
}

}  // namespace clepcast
