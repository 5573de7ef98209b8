#include "clepcast/pipeline.hpp"

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <sstream>
#include <type_traits>

#include <json.hpp>

#include "clepcast/serialize.hpp"

namespace clepcast {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

void emit(const DiagnosticSink& sink, std::string_view level, std::string_view code, std::string_view message) {
  if (sink) sink(diagnostic_json(level, code, message));
}

fs::path out_path(const RunConfig& cfg, std::string_view name) { return cfg.output_dir / std::string(name); }

void ensure_output_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) {
    throw Error(ErrorKind::Io, "cannot create output directory " + dir.string() + ": " + ec.message());
  }
}

std::string read_file(const fs::path& path, std::string_view hint) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot read " + path.string() + (hint.empty() ? "" : "; " + std::string(hint)));
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

// Write to a sibling temp file and rename, so readers never see a partial file.
void write_file(const fs::path& path, std::string_view content) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::Io, "cannot write " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw Error(ErrorKind::Io, "write failed for " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw Error(ErrorKind::Io, "cannot replace " + path.string() + ": " + ec.message());
}

const SourceDescriptor* top_priority(const std::vector<SourceDescriptor>& sources) {
  if (sources.empty()) return nullptr;
  return &*std::max_element(sources.begin(), sources.end(),
                            [](const auto& a, const auto& b) { return a.priority < b.priority; });
}

json repair_json(const RepairRecord& r) {
  return {{"event", "repair"},
          {"source", r.source},
          {"fips", r.county.fips()},
          {"date", format_date(r.day)},
          {"column", r.column},
          {"kind", to_string(r.kind)},
          {"old", r.old_value ? json(*r.old_value) : json(nullptr)},
          {"new", r.new_value}};
}

bool same_config(const EnsembleState& st, const EnsembleConfig& cfg) {
  return st.config.mu == cfg.mu && st.config.c == cfg.c && st.config.grace_days == cfg.grace_days &&
         st.predictors == std::vector<PredictorId>(kAllPredictors.begin(), kAllPredictors.end());
}

// FNV-1a over everything a state's weights depend on: the fit settings and the
// panel (all counties, features, adjacency) through the state's last issue day.
class Fingerprint {
 public:
  template <class T>
    requires std::is_arithmetic_v<T>
  void add(T value) {
    unsigned char bytes[sizeof(T)];
    std::memcpy(bytes, &value, sizeof(T));
    for (unsigned char b : bytes) mix(b);
  }
  void add(std::string_view text) {
    add(text.size());
    for (char ch : text) mix(static_cast<unsigned char>(ch));
  }
  std::string hex() const {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(hash_));
    return buf;
  }

 private:
  void mix(unsigned char b) {
    hash_ ^= b;
    hash_ *= 0x100000001b3ULL;
  }
  std::uint64_t hash_ = 0xcbf29ce484222325ULL;
};

std::string state_inputs(const Panel& panel, std::size_t through, const FitConfig& fit) {
  Fingerprint fp;
  fp.add(fit.k_fit);
  fp.add(fit.log_shift);
  fp.add(fit.min_points);
  fp.add(panel.start_date());
  for (const auto& [county, series] : panel.series()) {
    fp.add(county.fips());
    for (std::size_t d = 0; d <= through; ++d) fp.add(panel.deaths(county, d));
  }
  for (const auto& [county, features] : panel.static_features()) {
    fp.add(county.fips());
    for (const auto& [name, value] : features) {
      fp.add(name);
      fp.add(value);
    }
  }
  for (const auto& [county, neighbors] : panel.adjacency()) {
    fp.add(county.fips());
    for (const auto& n : neighbors) fp.add(n.fips());
  }
  return fp.hex();
}

std::map<int, std::string> load_state_inputs(const fs::path& path) {
  std::map<int, std::string> out;
  if (!fs::exists(path)) return out;
  const json doc = json::parse(read_file(path, ""), nullptr, false);
  if (!doc.is_object() || doc.value("format", "") != "clepcast.ensemble_inputs" || !doc.contains("horizons") ||
      !doc["horizons"].is_object()) {
    return out;
  }
  for (const auto& [h, key] : doc["horizons"].items()) {
    if (key.is_string()) out[std::atoi(h.c_str())] = key.get<std::string>();
  }
  return out;
}

std::map<Horizon, EnsembleState> load_states(const fs::path& path) {
  std::map<Horizon, EnsembleState> out;
  if (!fs::exists(path)) return out;
  for (auto& st : parse_ensemble_states(read_file(path, ""))) {
    const Horizon h = st.horizon;
    out.insert_or_assign(h, std::move(st));
  }
  return out;
}

json forecasts_json(const ForecastResult& result) {
  json doc{{"format", "clepcast.forecasts"}, {"version", 1}, {"as_of", format_date(result.as_of)}};
  json horizons = json::array();
  for (const auto& [h, by_county] : result.forecasts) {
    json counties = json::array();
    for (const auto& [county, f] : by_county) {
      json baselines = json::object();
      json weights = json::object();
      for (auto id : kAllPredictors) {
        baselines[std::string(tag(id))] = f.baselines[static_cast<std::size_t>(id)];
        weights[std::string(tag(id))] = f.weights.at(static_cast<std::size_t>(id));
      }
      counties.push_back({{"fips", county.fips()},
                          {"last_observed", f.last_observed},
                          {"baselines", std::move(baselines)},
                          {"weights", std::move(weights)},
                          {"clep", f.value},
                          {"lower", f.interval.lower},
                          {"upper", f.interval.upper},
                          {"delta", f.interval.delta},
                          {"provisional", f.interval.provisional}});
    }
    horizons.push_back({{"horizon", h.days()}, {"counties", std::move(counties)}});
  }
  doc["horizons"] = std::move(horizons);
  return doc;
}

}  // namespace

std::string diagnostic_json(std::string_view level, std::string_view code, std::string_view message) {
  return json{{"level", level}, {"code", code}, {"message", message}}.dump();
}

int exit_code(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::InvalidArgument:
    case ErrorKind::WindowOutOfRange:
    case ErrorKind::DegenerateWindow:
    case ErrorKind::NonFiniteLoss:
    case ErrorKind::InsufficientHistory:
    case ErrorKind::NonPositivePrediction:
    case ErrorKind::MissingActual:
    case ErrorKind::NoHospitals:
    case ErrorKind::UnsupportedSource:
      return 1;
    case ErrorKind::NegativeCount:
    case ErrorKind::SchemaMismatch:
    case ErrorKind::BadFips:
    case ErrorKind::ParseError:
    case ErrorKind::CalendarMismatch:
    case ErrorKind::OrphanCounty:
    case ErrorKind::UnknownCounty:
    case ErrorKind::DuplicateHospital:
    case ErrorKind::NonPositiveEmployees:
      return 2;
    case ErrorKind::Io: return 3;
    case ErrorKind::DateOutOfRange: return 4;
    case ErrorKind::MissingHospitalSource: return 5;
    case ErrorKind::InsufficientWarmup: return 6;
    case ErrorKind::MissingGeometry: return 7;
    case ErrorKind::StaleState: return 8;
    case ErrorKind::Busy: return 9;
  }
  return 10;
}

OutputLock::OutputLock(const fs::path& dir) {
  ensure_output_dir(dir);
  const fs::path lock = dir / std::string(artifact::kLock);
  fd_ = ::open(lock.c_str(), O_RDWR | O_CREAT | O_CLOEXEC, 0644);
  if (fd_ < 0) throw Error(ErrorKind::Io, "cannot open lock file " + lock.string() + ": " + std::strerror(errno));
  if (::flock(fd_, LOCK_EX | LOCK_NB) != 0) {
    const int err = errno;
    ::close(fd_);
    fd_ = -1;
    if (err == EWOULDBLOCK) throw Error(ErrorKind::Busy, "another run holds " + lock.string());
    throw Error(ErrorKind::Io, "cannot lock " + lock.string() + ": " + std::strerror(err));
  }
}

OutputLock::~OutputLock() {
  if (fd_ >= 0) {
    ::flock(fd_, LOCK_UN);
    ::close(fd_);
  }
}

Panel load_panel_artifact(const fs::path& output_dir) {
  return parse_panel(read_file(output_dir / std::string(artifact::kPanel), "run ingest first"));
}

IngestResult cmd_ingest(const RunConfig& config, const DiagnosticSink& sink) {
  config.validate();
  OutputLock lock(config.output_dir);

  std::vector<LoadedCounties> loaded;
  for (const auto& desc : config.sources_of(SourceKind::DeathsCases)) loaded.push_back(load_counties(desc, config.policy));

  std::vector<RepairRecord> repairs;
  std::vector<MergeDecision> conflicts;
  std::vector<DaySeries> series;
  if (loaded.size() == 1) {
    repairs = loaded.front().repairs;
    for (auto& ts : loaded.front().series) series.push_back(std::move(ts.series));
  } else {
    for (const auto& l : loaded) repairs.insert(repairs.end(), l.repairs.begin(), l.repairs.end());
    MergeResult merged = merge_sources(std::move(loaded), config.policy);
    repairs.insert(repairs.end(), merged.repairs.begin(), merged.repairs.end());
    conflicts = std::move(merged.conflicts);
    for (auto& ts : merged.series) series.push_back(std::move(ts.series));
  }

  // Static features: per (county, feature) the higher-priority source wins.
  auto feature_sources = config.sources_of(SourceKind::StaticFeatures);
  std::sort(feature_sources.begin(), feature_sources.end(),
            [](const auto& a, const auto& b) { return a.priority > b.priority; });
  StaticFeatures features;
  for (const auto& desc : feature_sources) {
    for (const auto& [county, fmap] : load_static_features(desc)) {
      for (const auto& [key, value] : fmap) features[county].emplace(key, value);
    }
  }
  std::vector<Edge> edges;
  for (const auto& desc : config.sources_of(SourceKind::Adjacency)) {
    auto e = load_adjacency(desc);
    edges.insert(edges.end(), e.begin(), e.end());
  }

  PanelBuild built = build_panel(std::move(series), std::move(features), std::move(edges), std::move(repairs));

  std::string log;
  for (const auto& r : built.panel.provenance()) log += repair_json(r).dump() + '\n';
  for (const auto& c : conflicts) {
    log += json{{"event", "merge_conflict"},
                {"fips", c.county.fips()},
                {"date", format_date(c.day)},
                {"kept_source", c.kept_source},
                {"kept", c.kept},
                {"dropped_source", c.dropped_source},
                {"dropped", c.dropped}}
               .dump() +
           '\n';
  }
  for (const auto& w : built.warnings) {
    log += json{{"event", "warning"}, {"code", w.code}, {"message", w.message}}.dump() + '\n';
    emit(sink, "warning", w.code, w.message);
  }

  write_file(out_path(config, artifact::kPanel), serialize_panel(built.panel));
  write_file(out_path(config, artifact::kIngestLog), log);

  IngestResult result{std::move(built.panel), 0, conflicts.size(), std::move(built.warnings)};
  result.repairs = result.panel.provenance().size();
  emit(sink, "info", "IngestComplete",
       std::to_string(result.panel.county_count()) + " counties, " + std::to_string(result.panel.num_days()) +
           " days (" + format_date(result.panel.start_date()) + ".." + format_date(result.panel.end_date()) + "), " +
           std::to_string(result.repairs) + " repairs, " + std::to_string(result.conflicts) + " merge conflicts");
  return result;
}

ForecastResult cmd_forecast(const RunConfig& config, std::optional<Day> as_of, const DiagnosticSink& sink) {
  config.validate();
  OutputLock lock(config.output_dir);
  const Panel panel = load_panel_artifact(config.output_dir);

  const Day day = as_of.value_or(panel.end_date());
  const auto idx = panel.index_of(day);
  if (!idx) {
    throw Error(ErrorKind::DateOutOfRange, "as-of date " + format_date(day) + " is outside the panel range " +
                                               format_date(panel.start_date()) + ".." + format_date(panel.end_date()));
  }

  const fs::path state_path = out_path(config, artifact::kEnsembleState);
  const fs::path inputs_path = out_path(config, artifact::kEnsembleInputs);
  std::map<Horizon, EnsembleState> states = load_states(state_path);
  std::map<int, std::string> inputs = load_state_inputs(inputs_path);

  ForecastResult result;
  result.as_of = day;
  for (const Horizon h : config.horizons) {
    auto it = states.find(h);
    bool fresh = it == states.end();
    if (!fresh && !same_config(it->second, config.ensemble)) {
      emit(sink, "warning", "StateReset",
           "stored h=" + std::to_string(h.days()) + " ensemble used different settings; replaying from scratch");
      fresh = true;
    } else if (!fresh && it->second.last_issue &&
               (*it->second.last_issue > day || !panel.index_of(*it->second.last_issue))) {
      emit(sink, "info", "StateReplay",
           "stored h=" + std::to_string(h.days()) + " ensemble issued through " +
               format_date(*it->second.last_issue) + "; replaying to " + format_date(day));
      fresh = true;
    } else if (!fresh && it->second.last_issue) {
      const auto key = inputs.find(h.days());
      if (key == inputs.end() ||
          key->second != state_inputs(panel, *panel.index_of(*it->second.last_issue), config.fit)) {
        emit(sink, "warning", "StateReset",
             "stored h=" + std::to_string(h.days()) +
                 " ensemble was built from different fit settings or panel history; replaying from scratch");
        fresh = true;
      }
    }
    if (fresh) it = states.insert_or_assign(h, EnsembleState(h, config.ensemble)).first;

    EnsembleState& st = it->second;
    if (!st.last_issue || *st.last_issue < day) advance(st, panel, *idx, config.fit);
    result.forecasts.emplace(h, clep_predict(panel, day, st, config.fit));
    if (st.last_issue) inputs[h.days()] = state_inputs(panel, *panel.index_of(*st.last_issue), config.fit);
  }

  std::vector<ForecastRow> rows;
  for (const auto& [h, by_county] : result.forecasts) {
    const auto r = forecast_rows(by_county);
    rows.insert(rows.end(), r.begin(), r.end());
  }
  write_file(out_path(config, artifact::kForecastsCsv), write_forecasts_csv(rows));
  if (config.wants("json")) write_file(out_path(config, artifact::kForecastsJson), forecasts_json(result).dump(1) + "\n");

  std::vector<EnsembleState> ordered;
  for (auto& [h, st] : states) ordered.push_back(std::move(st));
  write_file(state_path, serialize_ensemble_states(ordered));
  json inputs_doc{{"format", "clepcast.ensemble_inputs"}, {"version", 1}, {"horizons", json::object()}};
  for (const auto& [h, key] : inputs) inputs_doc["horizons"][std::to_string(h)] = key;
  write_file(inputs_path, inputs_doc.dump(1) + "\n");

  emit(sink, "info", "ForecastComplete",
       std::to_string(panel.county_count()) + " counties, as of " + format_date(day) + ", " +
           std::to_string(config.horizons.size()) + " horizons");
  return result;
}

SeverityAssessment cmd_severity(const RunConfig& config, std::optional<Day> as_of, const DiagnosticSink& sink) {
  config.validate();
  const auto hospital_sources = config.sources_of(SourceKind::Hospitals);
  const SourceDescriptor* desc = top_priority(hospital_sources);
  if (!desc) throw Error(ErrorKind::MissingHospitalSource, "config lists no hospitals source");
  if (!fs::exists(desc->path)) {
    throw Error(ErrorKind::MissingHospitalSource, "hospitals source '" + desc->name + "' not found at " + desc->path);
  }
  if (hospital_sources.size() > 1) {
    emit(sink, "warning", "ExtraHospitalSources", "using hospitals source '" + desc->name + "' (highest priority)");
  }

  OutputLock lock(config.output_dir);
  const Panel panel = load_panel_artifact(config.output_dir);
  const auto rows = parse_forecasts_csv(read_file(out_path(config, artifact::kForecastsCsv), "run forecast first"));

  std::map<CountyId, double> predicted;
  std::optional<Day> forecast_day;
  for (const auto& r : rows) {
    if (r.horizon != kSeverityHorizon || r.predictor != "clep") continue;
    forecast_day = r.as_of;
    predicted[r.county] = r.value;
  }
  if (!forecast_day) {
    throw Error(ErrorKind::InvalidArgument, "forecasts.csv has no 5-day CLEP forecasts; run forecast with horizon 5");
  }
  if (as_of && *as_of != *forecast_day) {
    throw Error(ErrorKind::InvalidArgument, "forecasts.csv was issued for " + format_date(*forecast_day) +
                                                ", not " + format_date(*as_of) + "; rerun forecast first");
  }
  const auto idx = panel.index_of(*forecast_day);
  if (!idx) throw Error(ErrorKind::DateOutOfRange, format_date(*forecast_day) + " is outside the panel range");

  std::map<CountyId, double> current;
  for (const auto& county : panel.counties()) current[county] = static_cast<double>(panel.deaths(county, *idx));

  const auto hospitals = load_hospitals(*desc, panel);
  SeverityAssessment assessment = assess_hospitals(hospitals, current, predicted);

  write_file(out_path(config, artifact::kSeverityCsv), write_severity_csv(assessment.records));
  if (config.wants("json")) {
    json records = json::array();
    for (const auto& r : assessment.records) {
      records.push_back({{"hospital_id", r.hospital_id},
                         {"fips", r.county.fips()},
                         {"current_imputed", r.current_imputed},
                         {"predicted_imputed", r.predicted_imputed},
                         {"icu_beds", r.icu_beds},
                         {"sub_scores", r.sub_scores},
                         {"score", r.total},
                         {"level", to_string(r.level)}});
    }
    json unassigned = json::array();
    for (const auto& c : assessment.unassigned) unassigned.push_back(c.fips());
    json doc{{"format", "clepcast.severity"},    {"version", 1},
             {"as_of", format_date(*forecast_day)}, {"horizon", kSeverityHorizon},
             {"hospitals", std::move(records)},   {"counties_without_hospitals", std::move(unassigned)}};
    write_file(out_path(config, artifact::kSeverityJson), doc.dump(1) + "\n");
  }
  if (!assessment.unassigned.empty()) {
    std::string list;
    for (const auto& c : assessment.unassigned) list += (list.empty() ? "" : ",") + c.fips();
    emit(sink, "info", "CountiesWithoutHospitals", list);
  }
  emit(sink, "info", "SeverityComplete",
       std::to_string(assessment.records.size()) + " hospitals scored as of " + format_date(*forecast_day));
  return assessment;
}

std::vector<BacktestReport> cmd_backtest(const RunConfig& config, std::optional<Day> start, std::optional<Day> end,
                                         const DiagnosticSink& sink) {
  config.validate();
  OutputLock lock(config.output_dir);
  const Panel panel = load_panel_artifact(config.output_dir);

  BacktestConfig base{"default", config.fit, config.ensemble};
  std::vector<BacktestConfig> configs;
  const auto& bt = config.backtest;
  if (bt.mus.empty() && bt.cs.empty() && bt.k_fits.empty()) {
    configs.push_back(base);
  } else {
    const std::vector<double> mus = bt.mus.empty() ? std::vector<double>{base.ensemble.mu} : bt.mus;
    const std::vector<double> cs = bt.cs.empty() ? std::vector<double>{base.ensemble.c} : bt.cs;
    const std::vector<std::size_t> ks = bt.k_fits.empty() ? std::vector<std::size_t>{base.fit.k_fit} : bt.k_fits;
    configs = config_grid(mus, cs, ks, base);
  }

  const Horizon max_h = *std::max_element(config.horizons.begin(), config.horizons.end());
  std::size_t warmup = 0;
  for (const auto& c : configs) warmup = std::max(warmup, required_warmup(c.fit, max_h));

  start = start ? start : bt.start;
  end = end ? end : bt.end;
  const Day first = start.value_or(panel.start_date() + static_cast<Day>(warmup));
  const Day last = end.value_or(panel.end_date() - max_h.days());
  if (!start && first > panel.end_date()) {
    throw Error(ErrorKind::InsufficientWarmup,
                "panel has " + std::to_string(panel.num_days()) + " days, need " + std::to_string(warmup) +
                    " warm-up days", static_cast<std::int64_t>(warmup));
  }
  if (!start && !end && first > last) {
    throw Error(ErrorKind::InsufficientWarmup, "panel is too short for a " + std::to_string(warmup) +
                                                   "-day warm-up plus horizon " + std::to_string(max_h.days()),
                static_cast<std::int64_t>(warmup));
  }

  const auto reports = rolling_backtest(panel, first, last, config.horizons, configs);
  write_file(out_path(config, artifact::kBacktestJson), serialize_backtest(reports));
  write_file(out_path(config, artifact::kBacktestTable), backtest_table(reports));
  emit(sink, "info", "BacktestComplete",
       std::to_string(configs.size()) + " configs, " + format_date(first) + ".." + format_date(last));
  return reports;
}

GeoJsonExport cmd_export(const RunConfig& config, const DiagnosticSink& sink) {
  config.validate();
  if (!config.geometry) throw Error(ErrorKind::MissingGeometry, "config has no [export] geometry file");
  if (!fs::exists(*config.geometry)) {
    throw Error(ErrorKind::MissingGeometry, "geometry file " + config.geometry->string() + " not found");
  }
  OutputLock lock(config.output_dir);

  const auto rows = parse_forecasts_csv(read_file(out_path(config, artifact::kForecastsCsv), "run forecast first"));
  const auto severity = parse_severity_csv(read_file(out_path(config, artifact::kSeverityCsv), "run severity first"));

  int horizon = 0;
  for (const auto& r : rows) {
    if (r.horizon == kSeverityHorizon) {
      horizon = kSeverityHorizon;
      break;
    }
    if (horizon == 0 || r.horizon < horizon) horizon = r.horizon;
  }
  if (horizon == 0) throw Error(ErrorKind::InvalidArgument, "forecasts.csv is empty");
  auto entries = map_entries(rows, horizon, severity);

  const fs::path state_path = out_path(config, artifact::kEnsembleState);
  if (fs::exists(state_path)) {
    const auto states = load_states(state_path);
    if (auto it = states.find(Horizon(horizon)); it != states.end() && it->second.predictors.size() == kPredictorCount) {
      for (auto& e : entries) {
        if (const auto* ce = it->second.find(e.county)) e.weights = ce->weights.weights;
      }
    }
  }

  GeoJsonExport geo = build_geojson(read_file(*config.geometry, ""), entries);
  for (const auto& c : geo.missing_geometry) {
    emit(sink, "warning", "MissingCountyGeometry", "county " + c.fips() + " has no geometry; skipped");
  }
  if (config.wants("geojson")) write_file(out_path(config, artifact::kMap), geo.text);
  if (config.wants("html")) write_file(out_path(config, artifact::kReport), build_html_report(geo.text, entries));
  emit(sink, "info", "ExportComplete",
       std::to_string(geo.features) + " features, " + std::to_string(geo.missing_geometry.size()) +
           " counties without geometry");
  return geo;
}

}  // namespace clepcast
