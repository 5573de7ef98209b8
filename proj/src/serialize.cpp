#include "clepcast/serialize.hpp"

#include <json.hpp>

namespace clepcast {

using nlohmann::json;

namespace {

void expect_format(const json& doc, std::string_view format, int version) {
  if (!doc.is_object() || doc.value("format", "") != format) {
    throw Error(ErrorKind::SchemaMismatch, "document is not a " + std::string(format) + " file");
  }
  if (doc.value("version", 0) != version) {
    throw Error(ErrorKind::SchemaMismatch, std::string(format) + " version " +
                                               std::to_string(doc.value("version", 0)) + " is not supported");
  }
}

json parse_json(std::string_view text) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::ParseError, std::string("malformed JSON: ") + e.what());
  }
}

json optional_day(const std::optional<Day>& d) { return d ? json(format_date(*d)) : json(nullptr); }

std::optional<Day> read_optional_day(const json& j) {
  if (j.is_null()) return std::nullopt;
  return parse_date(j.get<std::string>());
}

json interval_json(const Interval& iv) {
  return {{"center", iv.center}, {"delta", iv.delta}, {"lower", iv.lower}, {"upper", iv.upper},
          {"provisional", iv.provisional}};
}

Interval interval_from(const json& j) {
  return Interval{j.at("center").get<double>(), j.at("delta").get<double>(), j.at("lower").get<double>(),
                  j.at("upper").get<double>(), j.at("provisional").get<bool>()};
}

}  // namespace

std::string serialize_panel(const Panel& panel) {
  json doc;
  doc["format"] = "clepcast.panel";
  doc["version"] = kPanelFormatVersion;
  doc["start_date"] = format_date(panel.start_date());
  doc["num_days"] = panel.num_days();
  json counties = json::array();
  for (const auto& [id, s] : panel.series()) {
    json c{{"fips", id.fips()}, {"cum_deaths", s.cum_deaths}};
    if (s.cum_cases) c["cum_cases"] = *s.cum_cases;
    const auto& features = panel.static_features();
    if (auto f = features.find(id); f != features.end()) c["features"] = f->second;
    json nbrs = json::array();
    for (const auto& n : panel.neighbors(id)) nbrs.push_back(n.fips());
    c["neighbors"] = nbrs;
    counties.push_back(std::move(c));
  }
  doc["counties"] = std::move(counties);
  json repairs = json::array();
  for (const auto& r : panel.provenance()) {
    repairs.push_back({{"source", r.source},
                       {"fips", r.county.fips()},
                       {"date", format_date(r.day)},
                       {"column", r.column},
                       {"kind", to_string(r.kind)},
                       {"old", r.old_value ? json(*r.old_value) : json(nullptr)},
                       {"new", r.new_value}});
  }
  doc["repairs"] = std::move(repairs);
  return doc.dump(1) + "\n";
}

Panel parse_panel(std::string_view json_text) {
  const json doc = parse_json(json_text);
  expect_format(doc, "clepcast.panel", kPanelFormatVersion);
  try {
    const Day start = parse_date(doc.at("start_date").get<std::string>());
    const auto num_days = doc.at("num_days").get<std::size_t>();
    std::map<CountyId, DaySeries> series;
    std::map<CountyId, FeatureMap> features;
    std::map<CountyId, std::set<CountyId>> adjacency;
    for (const auto& c : doc.at("counties")) {
      const CountyId id = CountyId::parse(c.at("fips").get<std::string>());
      DaySeries s{id, start, c.at("cum_deaths").get<std::vector<std::int64_t>>(), std::nullopt};
      if (c.contains("cum_cases")) s.cum_cases = c.at("cum_cases").get<std::vector<std::int64_t>>();
      series.emplace(id, std::move(s));
      if (c.contains("features")) features[id] = c.at("features").get<FeatureMap>();
      for (const auto& n : c.at("neighbors")) adjacency[id].insert(CountyId::parse(n.get<std::string>()));
    }
    std::vector<RepairRecord> repairs;
    for (const auto& r : doc.at("repairs")) {
      static const std::map<std::string, RepairKind> kKinds = {{"running_max", RepairKind::RunningMax},
                                                               {"clamp_negative", RepairKind::ClampNegative},
                                                               {"forward_fill", RepairKind::ForwardFill},
                                                               {"zero_fill", RepairKind::ZeroFill}};
      RepairRecord rec{r.at("source").get<std::string>(),
                       CountyId::parse(r.at("fips").get<std::string>()),
                       parse_date(r.at("date").get<std::string>()),
                       r.at("column").get<std::string>(),
                       kKinds.at(r.at("kind").get<std::string>()),
                       r.at("old").is_null() ? std::nullopt : std::optional<std::int64_t>(r.at("old").get<std::int64_t>()),
                       r.at("new").get<std::int64_t>()};
      repairs.push_back(std::move(rec));
    }
    return Panel(start, num_days, std::move(series), std::move(features), std::move(adjacency), std::move(repairs));
  } catch (const json::exception& e) {
    throw Error(ErrorKind::SchemaMismatch, std::string("panel document: ") + e.what());
  } catch (const std::out_of_range& e) {
    throw Error(ErrorKind::SchemaMismatch, std::string("panel document: ") + e.what());
  }
}

std::string serialize_ensemble_states(std::span<const EnsembleState> states) {
  json doc;
  doc["format"] = "clepcast.ensemble_state";
  doc["version"] = kEnsembleFormatVersion;
  json arr = json::array();
  for (const auto& st : states) {
    json s;
    s["horizon"] = st.horizon.days();
    s["mu"] = st.config.mu;
    s["c"] = st.config.c;
    s["grace_days"] = st.config.grace_days;
    json preds = json::array();
    for (auto id : st.predictors) preds.push_back(tag(id));
    s["predictors"] = preds;
    s["first_issue"] = optional_day(st.first_issue);
    s["last_issue"] = optional_day(st.last_issue);
    s["last_scored_issue"] = optional_day(st.last_scored_issue);
    json counties = json::object();
    for (const auto& [id, ce] : st.counties) {
      json c;
      c["discounted_loss"] = ce.weights.discounted_loss;
      c["weights"] = ce.weights.weights;
      json pending = json::array();
      for (const auto& p : ce.pending) {
        pending.push_back({{"issued", format_date(p.issued)},
                           {"baselines", p.baselines},
                           {"clep", p.clep},
                           {"interval", interval_json(p.interval)}});
      }
      c["pending"] = std::move(pending);
      json history = json::array();
      for (const auto& h : ce.history) history.push_back({h.predicted, h.actual});
      c["history"] = std::move(history);
      counties[id.fips()] = std::move(c);
    }
    s["counties"] = std::move(counties);
    arr.push_back(std::move(s));
  }
  doc["states"] = std::move(arr);
  return doc.dump(1) + "\n";
}

std::vector<EnsembleState> parse_ensemble_states(std::string_view json_text) {
  const json doc = parse_json(json_text);
  expect_format(doc, "clepcast.ensemble_state", kEnsembleFormatVersion);
  std::vector<EnsembleState> out;
  try {
    for (const auto& s : doc.at("states")) {
      EnsembleConfig cfg;
      cfg.mu = s.at("mu").get<double>();
      cfg.c = s.at("c").get<double>();
      cfg.grace_days = s.at("grace_days").get<int>();
      std::vector<PredictorId> preds;
      for (const auto& p : s.at("predictors")) preds.push_back(predictor_from_tag(p.get<std::string>()));
      EnsembleState st(Horizon(s.at("horizon").get<int>()), cfg, preds);
      st.first_issue = read_optional_day(s.at("first_issue"));
      st.last_issue = read_optional_day(s.at("last_issue"));
      st.last_scored_issue = read_optional_day(s.at("last_scored_issue"));
      for (const auto& [fips, c] : s.at("counties").items()) {
        CountyEnsemble ce{WeightState{c.at("discounted_loss").get<std::vector<double>>(),
                                      c.at("weights").get<std::vector<double>>()},
                          {},
                          {}};
        if (ce.weights.weights.size() != preds.size() || ce.weights.discounted_loss.size() != preds.size()) {
          throw Error(ErrorKind::SchemaMismatch, "weight vector size mismatch for county " + fips);
        }
        for (const auto& p : c.at("pending")) {
          ce.pending.push_back({parse_date(p.at("issued").get<std::string>()),
                                p.at("baselines").get<std::vector<double>>(), p.at("clep").get<double>(),
                                interval_from(p.at("interval"))});
        }
        for (const auto& h : c.at("history")) ce.history.push_back({h.at(0).get<double>(), h.at(1).get<double>()});
        st.counties.emplace(CountyId::parse(fips), std::move(ce));
      }
      out.push_back(std::move(st));
    }
  } catch (const json::exception& e) {
    throw Error(ErrorKind::SchemaMismatch, std::string("ensemble state document: ") + e.what());
  }
  return out;
}

std::string serialize_backtest(std::span<const BacktestReport> reports) {
  json doc;
  doc["format"] = "clepcast.backtest";
  doc["version"] = kBacktestFormatVersion;
  json arr = json::array();
  for (const auto& r : reports) {
    json j;
    j["config"] = {{"name", r.config.name},
                   {"k_fit", r.config.fit.k_fit},
                   {"log_shift", r.config.fit.log_shift},
                   {"min_points", r.config.fit.min_points},
                   {"mu", r.config.ensemble.mu},
                   {"c", r.config.ensemble.c}};
    j["start"] = format_date(r.start);
    j["end"] = format_date(r.end);
    j["counties"] = r.counties;
    j["warmup_days"] = r.warmup_days;
    json hs = json::array();
    for (const auto& h : r.horizons) {
      json scores = json::object();
      for (const auto& [name, s] : h.scores) scores[name] = {{"mae", s.mae}, {"rmse", s.rmse}, {"mare", s.mare}};
      hs.push_back({{"horizon", h.horizon.days()},
                    {"scores", std::move(scores)},
                    {"coverage",
                     {{"covered", h.coverage.covered}, {"total", h.coverage.total}, {"fraction", h.coverage.fraction()}}},
                    {"scored_per_county", h.scored_per_county},
                    {"provisional_intervals", h.provisional_intervals},
                    {"max_weight_sum_error", h.max_weight_sum_error},
                    {"convexity_violations", h.convexity_violations}});
    }
    j["horizons"] = std::move(hs);
    arr.push_back(std::move(j));
  }
  doc["reports"] = std::move(arr);
  return doc.dump(1) + "\n";
}

}  // namespace clepcast
