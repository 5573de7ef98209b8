#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace clepcast {

enum class ErrorKind {
  InvalidArgument,
  NegativeCount,
  WindowOutOfRange,
  SchemaMismatch,
  BadFips,
  ParseError,
  CalendarMismatch,
  OrphanCounty,
  UnknownCounty,
  DuplicateHospital,
  NonPositiveEmployees,
  DegenerateWindow,
  NonFiniteLoss,
  StaleState,
  InsufficientHistory,
  NonPositivePrediction,
  MissingActual,
  NoHospitals,
  InsufficientWarmup,
  DateOutOfRange,
  Io,
  MissingHospitalSource,
  MissingGeometry,
  UnsupportedSource,
  Busy,
};

std::string_view to_string(ErrorKind kind) noexcept;

// Single exception type for the library. `index` carries the offending
// position (sequence index, CSV line, predictor slot) when one exists.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message, std::int64_t index = -1);

  ErrorKind kind() const noexcept { return kind_; }
  std::int64_t index() const noexcept { return index_; }

 private:
  ErrorKind kind_;
  std::int64_t index_;
};

}  // namespace clepcast
