#include "clepcast/severity.hpp"

#include <algorithm>
#include <cmath>

namespace clepcast {

std::string_view to_string(SeverityLevel level) noexcept {
  switch (level) {
    case SeverityLevel::Low: return "low";
    case SeverityLevel::Medium: return "medium";
    case SeverityLevel::High: return "high";
  }
  return "unknown";
}

SeverityLevel severity_level_from_string(std::string_view text) {
  if (text == "low") return SeverityLevel::Low;
  if (text == "medium") return SeverityLevel::Medium;
  if (text == "high") return SeverityLevel::High;
  throw Error(ErrorKind::InvalidArgument, "unknown severity level '" + std::string(text) + "'");
}

std::vector<double> impute_hospital(double county_value, std::span<const std::int64_t> employees) {
  if (employees.empty()) throw Error(ErrorKind::NoHospitals, "no hospitals to impute to");
  if (!(county_value >= 0.0) || !std::isfinite(county_value)) {
    throw Error(ErrorKind::InvalidArgument, "county value must be finite and non-negative");
  }
  double total = 0.0;
  for (auto e : employees) {
    if (e < 1) throw Error(ErrorKind::NonPositiveEmployees, "employee counts must be positive");
    total += static_cast<double>(e);
  }
  std::vector<double> out(employees.size());
  for (std::size_t i = 0; i < employees.size(); ++i) {
    out[i] = county_value * static_cast<double>(employees[i]) / total;
  }
  return out;
}

std::vector<int> tertile_scores(std::span<const double> values) {
  const std::size_t n = values.size();
  std::vector<int> out(n, 2);
  if (n == 0) return out;
  if (std::all_of(values.begin(), values.end(), [&](double v) { return v == values.front(); })) return out;

  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t i = 0; i < n; ++i) {
    const auto below = static_cast<std::size_t>(std::lower_bound(sorted.begin(), sorted.end(), values[i]) - sorted.begin());
    if (3 * below < n) {
      out[i] = 1;
    } else if (3 * below < 2 * n) {
      out[i] = 2;
    } else {
      out[i] = 3;
    }
  }
  return out;
}

SeverityLevel level_for_total(int total) {
  if (total < 3 || total > 9) throw Error(ErrorKind::InvalidArgument, "severity total must be in 3..9");
  if (total <= 4) return SeverityLevel::Low;
  if (total <= 6) return SeverityLevel::Medium;
  return SeverityLevel::High;
}

std::vector<SeverityRecord> severity_index(std::span<const HospitalLoad> loads) {
  std::vector<double> current;
  std::vector<double> predicted;
  std::vector<double> strain;
  for (const auto& l : loads) {
    if (!(l.current_imputed >= 0.0) || !(l.predicted_imputed >= 0.0) || l.icu_beds < 0) {
      throw Error(ErrorKind::InvalidArgument, "hospital '" + l.hospital_id + "' has negative inputs");
    }
    current.push_back(l.current_imputed);
    predicted.push_back(l.predicted_imputed);
    strain.push_back(l.predicted_imputed / (static_cast<double>(l.icu_beds) + 1.0));
  }
  const auto s_current = tertile_scores(current);
  const auto s_predicted = tertile_scores(predicted);
  const auto s_strain = tertile_scores(strain);

  std::vector<SeverityRecord> out;
  out.reserve(loads.size());
  for (std::size_t i = 0; i < loads.size(); ++i) {
    const auto& l = loads[i];
    SeverityRecord r{l.hospital_id, l.county, l.current_imputed, l.predicted_imputed, l.icu_beds,
                     {s_current[i], s_predicted[i], s_strain[i]}, 0, SeverityLevel::Low};
    r.total = r.sub_scores[0] + r.sub_scores[1] + r.sub_scores[2];
    r.level = level_for_total(r.total);
    out.push_back(std::move(r));
  }
  return out;
}

SeverityAssessment assess_hospitals(std::span<const Hospital> hospitals, const std::map<CountyId, double>& current,
                                    const std::map<CountyId, double>& predicted) {
  std::map<CountyId, std::vector<std::size_t>> by_county;
  for (std::size_t i = 0; i < hospitals.size(); ++i) by_county[hospitals[i].county].push_back(i);

  std::vector<double> cur_share(hospitals.size());
  std::vector<double> pred_share(hospitals.size());
  for (const auto& [county, idx] : by_county) {
    auto cur = current.find(county);
    auto pred = predicted.find(county);
    if (cur == current.end() || pred == predicted.end()) {
      throw Error(ErrorKind::UnknownCounty, "no county value for hospital county " + county.fips());
    }
    std::vector<std::int64_t> employees;
    for (auto i : idx) employees.push_back(hospitals[i].employees);
    const auto c = impute_hospital(cur->second, employees);
    const auto p = impute_hospital(pred->second, employees);
    for (std::size_t j = 0; j < idx.size(); ++j) {
      cur_share[idx[j]] = c[j];
      pred_share[idx[j]] = p[j];
    }
  }
  std::vector<HospitalLoad> loads;
  loads.reserve(hospitals.size());
  for (std::size_t i = 0; i < hospitals.size(); ++i) {
    loads.push_back({hospitals[i].id, hospitals[i].county, cur_share[i], pred_share[i], hospitals[i].icu_beds});
  }

  SeverityAssessment out;
  out.records = severity_index(loads);
  for (const auto& [county, _] : predicted) {
    if (!by_county.count(county)) out.unassigned.push_back(county);
  }
  return out;
}

}  // namespace clepcast
