#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace robinlab {

enum class ErrorCode {
  // geometry
  DegenerateHole,
  HoleTouchesBoundary,
  InvalidGeometry,
  RadiusOutOfRange,
  // mesh
  MeshFailure,
  // fem
  DegenerateTriangle,
  NoHoleBoundary,
  NegativeForm,
  DimensionMismatch,
  // eigensolve
  FactorizationFailure,
  NoConvergence,
  ZeroVector,
  // spectral metrics
  EmptySet,
  WindowMismatch,
  InsufficientEigenvalues,
  NonpositiveData,
  // closeness lab
  MeshMismatch,
  TraceInterpolationFailure,
  EmptyTestSet,
  // oracle
  RootBracketFailure,
  // experiments
  ConfigError,
  FatalConfig,
  IoError,
};

inline constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::DegenerateHole: return "DegenerateHole";
    case ErrorCode::HoleTouchesBoundary: return "HoleTouchesBoundary";
    case ErrorCode::InvalidGeometry: return "InvalidGeometry";
    case ErrorCode::RadiusOutOfRange: return "RadiusOutOfRange";
    case ErrorCode::MeshFailure: return "MeshFailure";
    case ErrorCode::DegenerateTriangle: return "DegenerateTriangle";
    case ErrorCode::NoHoleBoundary: return "NoHoleBoundary";
    case ErrorCode::NegativeForm: return "NegativeForm";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::FactorizationFailure: return "FactorizationFailure";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::ZeroVector: return "ZeroVector";
    case ErrorCode::EmptySet: return "EmptySet";
    case ErrorCode::WindowMismatch: return "WindowMismatch";
    case ErrorCode::InsufficientEigenvalues: return "InsufficientEigenvalues";
    case ErrorCode::NonpositiveData: return "NonpositiveData";
    case ErrorCode::MeshMismatch: return "MeshMismatch";
    case ErrorCode::TraceInterpolationFailure: return "TraceInterpolationFailure";
    case ErrorCode::EmptyTestSet: return "EmptyTestSet";
    case ErrorCode::RootBracketFailure: return "RootBracketFailure";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::FatalConfig: return "FatalConfig";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

/// Single exception type for the library; `code()` identifies the failure.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

}  // namespace robinlab
