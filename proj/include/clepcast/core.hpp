#pragma once

// County panel data model: identifiers, calendar days, cumulative series, and
// the immutable Panel every forecasting stage reads from.

#include <compare>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "clepcast/error.hpp"

namespace clepcast {

/// 5-digit FIPS county code. Construct through parse().
class CountyId {
 public:
  static CountyId parse(std::string_view fips);
  static bool is_valid(std::string_view fips) noexcept;

  const std::string& fips() const noexcept { return fips_; }
  int state_code() const noexcept;

  auto operator<=>(const CountyId&) const = default;

 private:
  explicit CountyId(std::string fips) : fips_(std::move(fips)) {}
  std::string fips_;
};

/// Calendar day as days since 1970-01-01. ISO-8601 only at the boundaries.
using Day = std::int32_t;

Day parse_date(std::string_view iso);
std::string format_date(Day day);

/// Forecast horizon in days, 1..21.
class Horizon {
 public:
  static constexpr int kMin = 1;
  static constexpr int kMax = 21;

  explicit Horizon(int days);
  int days() const noexcept { return days_; }

  auto operator<=>(const Horizon&) const = default;

 private:
  int days_;
};

struct DaySeries {
  CountyId county;
  Day start = 0;
  std::vector<std::int64_t> cum_deaths;
  std::optional<std::vector<std::int64_t>> cum_cases;

  std::size_t size() const noexcept { return cum_deaths.size(); }
  Day end() const noexcept { return start + static_cast<Day>(cum_deaths.size()) - 1; }

  bool operator==(const DaySeries&) const = default;
};

enum class MonotoneFixPolicy {
  RunningMax,  // negatives clamp to 0, dips replaced by the running maximum
  Strict,      // negatives are an error, dips still repaired by running maximum
};

enum class RepairKind { RunningMax, ClampNegative, ForwardFill, ZeroFill };

std::string_view to_string(RepairKind kind) noexcept;

struct Repair {
  std::size_t index = 0;
  std::optional<std::int64_t> old_value;  // empty for filled gaps
  std::int64_t new_value = 0;
  RepairKind kind = RepairKind::RunningMax;

  bool operator==(const Repair&) const = default;
};

struct CleanResult {
  std::vector<std::int64_t> values;
  std::vector<Repair> repairs;
};

CleanResult validate_cumulative(std::span<const std::int64_t> raw,
                                MonotoneFixPolicy policy = MonotoneFixPolicy::RunningMax);

/// The last `k` values ending at index `end_day` (inclusive).
template <class T>
std::span<const T> window(std::span<const T> values, std::size_t end_day, std::size_t k) {
  if (k == 0 || end_day >= values.size() || k > end_day + 1) {
    throw Error(ErrorKind::WindowOutOfRange,
                "window of " + std::to_string(k) + " days ending at index " +
                    std::to_string(end_day) + " does not fit a series of length " +
                    std::to_string(values.size()));
  }
  return values.subspan(end_day + 1 - k, k);
}

/// A repair applied while building a panel, anchored to a county and date.
struct RepairRecord {
  std::string source;
  CountyId county;
  Day day = 0;
  std::string column = "cum_deaths";
  RepairKind kind = RepairKind::RunningMax;
  std::optional<std::int64_t> old_value;
  std::int64_t new_value = 0;

  bool operator==(const RepairRecord&) const = default;
};

using FeatureMap = std::map<std::string, double>;

/// Calendar-aligned county panel. Immutable after construction; the
/// constructor enforces alignment, symmetry and orphan rules.
class Panel {
 public:
  Panel(Day start, std::size_t num_days, std::map<CountyId, DaySeries> series,
        std::map<CountyId, FeatureMap> static_features,
        std::map<CountyId, std::set<CountyId>> adjacency,
        std::vector<RepairRecord> provenance = {});

  Day start_date() const noexcept { return start_; }
  Day end_date() const noexcept { return start_ + static_cast<Day>(num_days_) - 1; }
  std::size_t num_days() const noexcept { return num_days_; }
  std::size_t county_count() const noexcept { return series_.size(); }

  std::optional<std::size_t> index_of(Day day) const noexcept;
  Day day_at(std::size_t index) const noexcept { return start_ + static_cast<Day>(index); }

  bool contains(const CountyId& county) const { return series_.count(county) != 0; }
  const DaySeries& at(const CountyId& county) const;
  std::int64_t deaths(const CountyId& county, std::size_t index) const;
  std::vector<CountyId> counties() const;

  std::optional<double> feature(const CountyId& county, std::string_view name) const;
  const std::set<CountyId>& neighbors(const CountyId& county) const;

  const std::map<CountyId, DaySeries>& series() const noexcept { return series_; }
  const std::map<CountyId, FeatureMap>& static_features() const noexcept { return features_; }
  const std::map<CountyId, std::set<CountyId>>& adjacency() const noexcept { return adjacency_; }
  const std::vector<RepairRecord>& provenance() const noexcept { return provenance_; }

 private:
  Day start_;
  std::size_t num_days_;
  std::map<CountyId, DaySeries> series_;
  std::map<CountyId, FeatureMap> features_;
  std::map<CountyId, std::set<CountyId>> adjacency_;
  std::vector<RepairRecord> provenance_;
};

bool operator==(const Panel& a, const Panel& b);

}  // namespace clepcast
