#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace qmix {

enum class ErrorKind {
  NotHermitian,
  BadSubset,
  InvalidState,
  UnsupportedSize,
  OutsideTetrahedron,
  BadRatio,
  BadWeight,
  BadSettings,
  OptimizerFailure,
  UnsupportedMeasure,
  MissingMeasure,
  IoError,
  ParseError,
};

std::string_view to_string(ErrorKind kind);

/// Single exception type for the library; `kind()` distinguishes the failure.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

inline std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::NotHermitian: return "NotHermitian";
    case ErrorKind::BadSubset: return "BadSubset";
    case ErrorKind::InvalidState: return "InvalidState";
    case ErrorKind::UnsupportedSize: return "UnsupportedSize";
    case ErrorKind::OutsideTetrahedron: return "OutsideTetrahedron";
    case ErrorKind::BadRatio: return "BadRatio";
    case ErrorKind::BadWeight: return "BadWeight";
    case ErrorKind::BadSettings: return "BadSettings";
    case ErrorKind::OptimizerFailure: return "OptimizerFailure";
    case ErrorKind::UnsupportedMeasure: return "UnsupportedMeasure";
    case ErrorKind::MissingMeasure: return "MissingMeasure";
    case ErrorKind::IoError: return "IoError";
    case ErrorKind::ParseError: return "ParseError";
  }
  return "Unknown";
}

}  // namespace qmix
