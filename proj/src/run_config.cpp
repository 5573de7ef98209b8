#include "clepcast/run_config.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "clepcast/csv.hpp"

namespace clepcast {

namespace pt = boost::property_tree;

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_list(std::string_view text) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto comma = text.find(',', pos);
    const auto item = trim(text.substr(pos, comma == std::string_view::npos ? std::string_view::npos : comma - pos));
    if (!item.empty()) out.push_back(item);
    if (comma == std::string_view::npos) break;
    pos = comma + 1;
  }
  return out;
}

double to_double(const std::string& text, const std::string& key) {
  try {
    return csv::parse_double(text, 0, key);
  } catch (const Error&) {
    throw Error(ErrorKind::InvalidArgument, "config key '" + key + "': '" + text + "' is not a number");
  }
}

std::int64_t to_int(const std::string& text, const std::string& key) {
  try {
    return csv::parse_int(text, 0, key);
  } catch (const Error&) {
    throw Error(ErrorKind::InvalidArgument, "config key '" + key + "': '" + text + "' is not an integer");
  }
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  const std::filesystem::path path(p);
  if (path.is_absolute() || p.find("://") != std::string::npos) return path;
  return (base / path).lexically_normal();
}

void check_keys(const pt::ptree& section, const std::string& name, std::initializer_list<std::string_view> allowed) {
  for (const auto& [key, value] : section) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      throw Error(ErrorKind::InvalidArgument, "unknown key '" + key + "' in section [" + name + "]");
    }
  }
}

}  // namespace

std::vector<Horizon> parse_horizon_list(std::string_view text) {
  std::vector<Horizon> out;
  for (const auto& item : split_list(text)) {
    const auto v = to_int(item, "horizons");
    if (v < 1 || v > 21) throw Error(ErrorKind::InvalidArgument, "horizon " + item + " outside 1..21");
    const Horizon h(static_cast<int>(v));
    if (std::find(out.begin(), out.end(), h) == out.end()) out.push_back(h);
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::set<std::string> parse_format_list(std::string_view text) {
  std::set<std::string> out;
  for (const auto& item : split_list(text)) {
    if (!kKnownFormats.count(item)) throw Error(ErrorKind::InvalidArgument, "unknown output format '" + item + "'");
    out.insert(item);
  }
  return out;
}

std::vector<SourceDescriptor> RunConfig::sources_of(SourceKind kind) const {
  std::vector<SourceDescriptor> out;
  for (const auto& s : sources) {
    if (s.kind == kind) out.push_back(s);
  }
  return out;
}

void RunConfig::validate() const {
  fit.validate();
  ensemble.validate();
  if (horizons.empty()) throw Error(ErrorKind::InvalidArgument, "at least one horizon is required");
  if (sources_of(SourceKind::DeathsCases).empty()) {
    throw Error(ErrorKind::InvalidArgument, "config lists no deaths_cases source");
  }
  std::set<std::string> names;
  std::map<SourceKind, std::set<int>> priorities;
  for (const auto& s : sources) {
    if (!names.insert(s.name).second) throw Error(ErrorKind::InvalidArgument, "duplicate source name '" + s.name + "'");
    if (!priorities[s.kind].insert(s.priority).second) {
      throw Error(ErrorKind::InvalidArgument, "sources of kind " + std::string(to_string(s.kind)) +
                                                  " share priority " + std::to_string(s.priority));
    }
  }
  if (output_dir.empty()) throw Error(ErrorKind::InvalidArgument, "output directory is empty");
}

RunConfig parse_run_config(std::string_view ini_text, const std::filesystem::path& base_dir) {
  pt::ptree tree;
  try {
    std::istringstream in{std::string(ini_text)};
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw Error(ErrorKind::InvalidArgument, std::string("config: ") + e.what());
  }

  RunConfig cfg;
  for (const auto& [section, body] : tree) {
    auto get = [&](const std::string& key) { return body.get_optional<std::string>(key); };
    const std::string where = section + ".";
    if (section == "run") {
      check_keys(body, section, {"output", "horizons", "formats", "policy"});
      if (auto v = get("output")) cfg.output_dir = resolve(base_dir, trim(*v));
      if (auto v = get("horizons")) cfg.horizons = parse_horizon_list(*v);
      if (auto v = get("formats")) cfg.formats = parse_format_list(*v);
      if (auto v = get("policy")) {
        const auto p = trim(*v);
        if (p == "running_max") {
          cfg.policy = MonotoneFixPolicy::RunningMax;
        } else if (p == "strict") {
          cfg.policy = MonotoneFixPolicy::Strict;
        } else {
          throw Error(ErrorKind::InvalidArgument, "unknown policy '" + p + "'");
        }
      }
    } else if (section == "fit") {
      check_keys(body, section, {"k_fit", "log_shift", "min_points"});
      if (auto v = get("k_fit")) cfg.fit.k_fit = static_cast<std::size_t>(to_int(trim(*v), where + "k_fit"));
      if (auto v = get("log_shift")) cfg.fit.log_shift = to_double(trim(*v), where + "log_shift");
      if (auto v = get("min_points")) cfg.fit.min_points = static_cast<std::size_t>(to_int(trim(*v), where + "min_points"));
    } else if (section == "ensemble") {
      check_keys(body, section, {"mu", "c", "grace_days"});
      if (auto v = get("mu")) cfg.ensemble.mu = to_double(trim(*v), where + "mu");
      if (auto v = get("c")) cfg.ensemble.c = to_double(trim(*v), where + "c");
      if (auto v = get("grace_days")) cfg.ensemble.grace_days = static_cast<int>(to_int(trim(*v), where + "grace_days"));
    } else if (section == "backtest") {
      check_keys(body, section, {"start", "end", "mu", "c", "k_fit"});
      if (auto v = get("start")) cfg.backtest.start = parse_date(trim(*v));
      if (auto v = get("end")) cfg.backtest.end = parse_date(trim(*v));
      if (auto v = get("mu")) {
        for (const auto& x : split_list(*v)) cfg.backtest.mus.push_back(to_double(x, where + "mu"));
      }
      if (auto v = get("c")) {
        for (const auto& x : split_list(*v)) cfg.backtest.cs.push_back(to_double(x, where + "c"));
      }
      if (auto v = get("k_fit")) {
        for (const auto& x : split_list(*v)) {
          cfg.backtest.k_fits.push_back(static_cast<std::size_t>(to_int(x, where + "k_fit")));
        }
      }
    } else if (section == "export") {
      check_keys(body, section, {"geometry"});
      if (auto v = get("geometry")) cfg.geometry = resolve(base_dir, trim(*v));
    } else if (section.rfind("source.", 0) == 0) {
      check_keys(body, section, {"kind", "path", "priority"});
      SourceDescriptor d;
      d.name = section.substr(7);
      if (d.name.empty()) throw Error(ErrorKind::InvalidArgument, "source section without a name");
      const auto kind = get("kind");
      const auto path = get("path");
      if (!kind || !path) throw Error(ErrorKind::InvalidArgument, "[" + section + "] needs kind and path");
      d.kind = source_kind_from_string(trim(*kind));
      d.path = resolve(base_dir, trim(*path)).string();
      if (auto v = get("priority")) d.priority = static_cast<int>(to_int(trim(*v), where + "priority"));
      cfg.sources.push_back(std::move(d));
    } else {
      throw Error(ErrorKind::InvalidArgument, "unknown config section [" + section + "]");
    }
  }
  return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot read config " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse_run_config(text.str(), path.parent_path().empty() ? std::filesystem::path(".") : path.parent_path());
}

}  // namespace clepcast
