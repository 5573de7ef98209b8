#include "clepcast/core.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <chrono>
#include <cstdio>

namespace clepcast {

namespace {

// Territories accepted alongside the 01-56 state range.
constexpr std::array<int, 5> kTerritoryCodes = {60, 66, 69, 72, 78};

int two_digits(std::string_view s) { return (s[0] - '0') * 10 + (s[1] - '0'); }

}  // namespace

bool CountyId::is_valid(std::string_view fips) noexcept {
  if (fips.size() != 5) return false;
  if (!std::all_of(fips.begin(), fips.end(), [](char c) { return c >= '0' && c <= '9'; })) {
    return false;
  }
  const int state = two_digits(fips);
  if (state >= 1 && state <= 56) return true;
  return std::find(kTerritoryCodes.begin(), kTerritoryCodes.end(), state) != kTerritoryCodes.end();
}

CountyId CountyId::parse(std::string_view fips) {
  if (!is_valid(fips)) {
    throw Error(ErrorKind::BadFips, "invalid FIPS code '" + std::string(fips) + "'");
  }
  return CountyId(std::string(fips));
}

int CountyId::state_code() const noexcept { return two_digits(fips_); }

Day parse_date(std::string_view iso) {
  auto bad = [&] {
    return Error(ErrorKind::InvalidArgument, "invalid date '" + std::string(iso) + "', expected YYYY-MM-DD");
  };
  if (iso.size() != 10 || iso[4] != '-' || iso[7] != '-') throw bad();
  int y = 0;
  unsigned m = 0;
  unsigned d = 0;
  auto parse_part = [&](std::string_view part, auto& out) {
    auto [ptr, ec] = std::from_chars(part.data(), part.data() + part.size(), out);
    if (ec != std::errc() || ptr != part.data() + part.size()) throw bad();
  };
  parse_part(iso.substr(0, 4), y);
  parse_part(iso.substr(5, 2), m);
  parse_part(iso.substr(8, 2), d);
  const std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{m}, std::chrono::day{d}};
  if (!ymd.ok()) throw bad();
  return static_cast<Day>(std::chrono::sys_days{ymd}.time_since_epoch().count());
}

std::string format_date(Day day) {
  const std::chrono::year_month_day ymd{std::chrono::sys_days{std::chrono::days{day}}};
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
  return buf;
}

Horizon::Horizon(int days) : days_(days) {
  if (days < kMin || days > kMax) {
    throw Error(ErrorKind::InvalidArgument,
                "horizon " + std::to_string(days) + " outside 1..21 days");
  }
}

std::string_view to_string(RepairKind kind) noexcept {
  switch (kind) {
    case RepairKind::RunningMax: return "running_max";
    case RepairKind::ClampNegative: return "clamp_negative";
    case RepairKind::ForwardFill: return "forward_fill";
    case RepairKind::ZeroFill: return "zero_fill";
  }
  return "unknown";
}

CleanResult validate_cumulative(std::span<const std::int64_t> raw, MonotoneFixPolicy policy) {
  if (raw.empty()) throw Error(ErrorKind::InvalidArgument, "cannot clean an empty sequence");

  CleanResult out;
  out.values.reserve(raw.size());
  std::int64_t running = 0;
  for (std::size_t i = 0; i < raw.size(); ++i) {
    std::int64_t v = raw[i];
    if (v < 0) {
      if (policy == MonotoneFixPolicy::Strict) {
        throw Error(ErrorKind::NegativeCount,
                    "negative cumulative count " + std::to_string(v) + " at index " + std::to_string(i),
                    static_cast<std::int64_t>(i));
      }
      out.repairs.push_back({i, v, std::max<std::int64_t>(running, 0), RepairKind::ClampNegative});
      v = std::max<std::int64_t>(running, 0);
    } else if (v < running) {
      out.repairs.push_back({i, v, running, RepairKind::RunningMax});
      v = running;
    }
    running = v;
    out.values.push_back(v);
  }
  return out;
}

Panel::Panel(Day start, std::size_t num_days, std::map<CountyId, DaySeries> series,
             std::map<CountyId, FeatureMap> static_features,
             std::map<CountyId, std::set<CountyId>> adjacency, std::vector<RepairRecord> provenance)
    : start_(start),
      num_days_(num_days),
      series_(std::move(series)),
      features_(std::move(static_features)),
      adjacency_(std::move(adjacency)),
      provenance_(std::move(provenance)) {
  if (num_days_ == 0) throw Error(ErrorKind::InvalidArgument, "panel must span at least one day");
  for (const auto& [id, s] : series_) {
    if (!(s.county == id)) {
      throw Error(ErrorKind::InvalidArgument, "series keyed " + id.fips() + " belongs to " + s.county.fips());
    }
    if (s.start != start_ || s.size() != num_days_) {
      throw Error(ErrorKind::CalendarMismatch,
                  "series " + id.fips() + " is not aligned to the panel calendar");
    }
    if (s.cum_cases && s.cum_cases->size() != s.size()) {
      throw Error(ErrorKind::InvalidArgument, "case series length differs for " + id.fips());
    }
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (s.cum_deaths[i] < 0 || (i > 0 && s.cum_deaths[i] < s.cum_deaths[i - 1])) {
        throw Error(ErrorKind::InvalidArgument,
                    "series " + id.fips() + " is not a cleaned cumulative count at index " + std::to_string(i),
                    static_cast<std::int64_t>(i));
      }
    }
  }
  for (const auto& [id, features] : features_) {
    if (!contains(id)) throw Error(ErrorKind::OrphanCounty, "features reference unknown county " + id.fips());
  }
  for (const auto& [a, nbrs] : adjacency_) {
    if (!contains(a)) throw Error(ErrorKind::OrphanCounty, "adjacency references unknown county " + a.fips());
    for (const auto& b : nbrs) {
      if (!contains(b)) throw Error(ErrorKind::OrphanCounty, "adjacency references unknown county " + b.fips());
      auto back = adjacency_.find(b);
      if (back == adjacency_.end() || back->second.count(a) == 0) {
        throw Error(ErrorKind::InvalidArgument,
                    "adjacency is not symmetric: " + a.fips() + " -> " + b.fips());
      }
    }
  }
}

std::optional<std::size_t> Panel::index_of(Day day) const noexcept {
  if (day < start_ || day > end_date()) return std::nullopt;
  return static_cast<std::size_t>(day - start_);
}

const DaySeries& Panel::at(const CountyId& county) const {
  auto it = series_.find(county);
  if (it == series_.end()) throw Error(ErrorKind::UnknownCounty, "county " + county.fips() + " not in panel");
  return it->second;
}

std::int64_t Panel::deaths(const CountyId& county, std::size_t index) const {
  return at(county).cum_deaths.at(index);
}

std::vector<CountyId> Panel::counties() const {
  std::vector<CountyId> out;
  out.reserve(series_.size());
  for (const auto& [id, _] : series_) out.push_back(id);
  return out;
}

std::optional<double> Panel::feature(const CountyId& county, std::string_view name) const {
  auto it = features_.find(county);
  if (it == features_.end()) return std::nullopt;
  auto f = it->second.find(std::string(name));
  if (f == it->second.end()) return std::nullopt;
  return f->second;
}

const std::set<CountyId>& Panel::neighbors(const CountyId& county) const {
  static const std::set<CountyId> kEmpty;
  auto it = adjacency_.find(county);
  return it == adjacency_.end() ? kEmpty : it->second;
}

bool operator==(const Panel& a, const Panel& b) {
  return a.start_date() == b.start_date() && a.num_days() == b.num_days() && a.series() == b.series() &&
         a.static_features() == b.static_features() && a.adjacency() == b.adjacency() &&
         a.provenance() == b.provenance();
}

}  // namespace clepcast
