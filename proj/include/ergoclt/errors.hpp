#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace ergoclt {

enum class ErrorKind {
  NotStochastic,
  Reducible,
  WindowMismatch,
  SidednessMismatch,
  InvalidIndex,
  CapExceeded,
  NotCentered,
  Diverging,
  NonSummable,
  DegenerateSigma,
  InvalidArgument,
  Config,
};

std::string_view to_string(ErrorKind kind);

/// Single exception type for the library; `kind()` lets callers branch
/// without string matching.
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
    case ErrorKind::NotStochastic: return "NotStochastic";
    case ErrorKind::Reducible: return "Reducible";
    case ErrorKind::WindowMismatch: return "WindowMismatch";
    case ErrorKind::SidednessMismatch: return "SidednessMismatch";
    case ErrorKind::InvalidIndex: return "InvalidIndex";
    case ErrorKind::CapExceeded: return "CapExceeded";
    case ErrorKind::NotCentered: return "NotCentered";
    case ErrorKind::Diverging: return "Diverging";
    case ErrorKind::NonSummable: return "NonSummable";
    case ErrorKind::DegenerateSigma: return "DegenerateSigma";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::Config: return "Config";
  }
  return "Unknown";
}

}  // namespace ergoclt
