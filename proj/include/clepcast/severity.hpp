#pragma once

// Hospital-level imputation of county quantities and the three-tier
// severity index.
//
// Each hospital gets three sub-scores (1..3) from population tertiles across
// all hospitals: current imputed deaths, predicted imputed deaths, and
// predicted imputed deaths per ICU bed (beds + 1). Totals 3-4 are Low, 5-6
// Medium, 7-9 High.

#include <array>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "clepcast/core.hpp"
#include "clepcast/ingest.hpp"

namespace clepcast {

enum class SeverityLevel { Low, Medium, High };

std::string_view to_string(SeverityLevel level) noexcept;
SeverityLevel severity_level_from_string(std::string_view text);

/// Splits county_value across hospitals proportionally to employees.
std::vector<double> impute_hospital(double county_value, std::span<const std::int64_t> employees);

struct HospitalLoad {
  std::string hospital_id;
  CountyId county;
  double current_imputed = 0.0;
  double predicted_imputed = 0.0;
  std::int64_t icu_beds = 0;
};

struct SeverityRecord {
  std::string hospital_id;
  CountyId county;
  double current_imputed = 0.0;
  double predicted_imputed = 0.0;
  std::int64_t icu_beds = 0;
  std::array<int, 3> sub_scores{};
  int total = 0;
  SeverityLevel level = SeverityLevel::Low;
};

/// Tertile sub-score of each value among all values. A value's score comes
/// from the number of values strictly below it, so ties share the lower
/// score; if every value is equal all scores are 2.
std::vector<int> tertile_scores(std::span<const double> values);

SeverityLevel level_for_total(int total);

std::vector<SeverityRecord> severity_index(std::span<const HospitalLoad> loads);

struct SeverityAssessment {
  std::vector<SeverityRecord> records;  // input hospital order
  std::vector<CountyId> unassigned;     // counties with no hospital
};

/// Imputes current and predicted county deaths to hospitals and scores them.
SeverityAssessment assess_hospitals(std::span<const Hospital> hospitals,
                                    const std::map<CountyId, double>& current,
                                    const std::map<CountyId, double>& predicted);

}  // namespace clepcast
