#include "clepcast/error.hpp"

namespace clepcast {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::NegativeCount: return "NegativeCount";
    case ErrorKind::WindowOutOfRange: return "WindowOutOfRange";
    case ErrorKind::SchemaMismatch: return "SchemaMismatch";
    case ErrorKind::BadFips: return "BadFips";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::CalendarMismatch: return "CalendarMismatch";
    case ErrorKind::OrphanCounty: return "OrphanCounty";
    case ErrorKind::UnknownCounty: return "UnknownCounty";
    case ErrorKind::DuplicateHospital: return "DuplicateHospital";
    case ErrorKind::NonPositiveEmployees: return "NonPositiveEmployees";
    case ErrorKind::DegenerateWindow: return "DegenerateWindow";
    case ErrorKind::NonFiniteLoss: return "NonFiniteLoss";
    case ErrorKind::StaleState: return "StaleState";
    case ErrorKind::InsufficientHistory: return "InsufficientHistory";
    case ErrorKind::NonPositivePrediction: return "NonPositivePrediction";
    case ErrorKind::MissingActual: return "MissingActual";
    case ErrorKind::NoHospitals: return "NoHospitals";
    case ErrorKind::InsufficientWarmup: return "InsufficientWarmup";
    case ErrorKind::DateOutOfRange: return "DateOutOfRange";
    case ErrorKind::Io: return "IoError";
    case ErrorKind::MissingHospitalSource: return "MissingHospitalSource";
    case ErrorKind::MissingGeometry: return "MissingGeometry";
    case ErrorKind::UnsupportedSource: return "UnsupportedSource";
    case ErrorKind::Busy: return "Busy";
  }
  return "Unknown";
}

Error::Error(ErrorKind kind, const std::string& message, std::int64_t index)
    : std::runtime_error(message), kind_(kind), index_(index) {}

}  // namespace clepcast
