#pragma once

#include <stdexcept>
#include <string>

namespace bt {

enum class ErrorKind {
  // validation (exit class 2)
  DimensionMismatch,
  NotPositiveDefinite,
  BadPeriods,
  SingularPrior,
  SingularPosteriorPrecision,
  BadLevel,
  NegativeVariance,
  BadRho,
  TooFewPeriods,
  SingularOmega,
  EmptyGrid,
  DimensionTooLarge,
  SingularCovariance,
  // configuration / input files (exit class 3)
  ParseError,
  BadConfig,
  // internal (exit class 1)
  AllWeightsUnderflow,
  GridTooCoarse,
  Internal,
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::NotPositiveDefinite: return "NotPositiveDefinite";
    case ErrorKind::BadPeriods: return "BadPeriods";
    case ErrorKind::SingularPrior: return "SingularPrior";
    case ErrorKind::SingularPosteriorPrecision: return "SingularPosteriorPrecision";
    case ErrorKind::BadLevel: return "BadLevel";
    case ErrorKind::NegativeVariance: return "NegativeVariance";
    case ErrorKind::BadRho: return "BadRho";
    case ErrorKind::TooFewPeriods: return "TooFewPeriods";
    case ErrorKind::SingularOmega: return "SingularOmega";
    case ErrorKind::EmptyGrid: return "EmptyGrid";
    case ErrorKind::DimensionTooLarge: return "DimensionTooLarge";
    case ErrorKind::SingularCovariance: return "SingularCovariance";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::BadConfig: return "BadConfig";
    case ErrorKind::AllWeightsUnderflow: return "AllWeightsUnderflow";
    case ErrorKind::GridTooCoarse: return "GridTooCoarse";
    case ErrorKind::Internal: return "Internal";
  }
  return "Unknown";
}

// Exit classes: 0 success, 1 internal, 2 validation, 3 config.
inline int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::ParseError:
    case ErrorKind::BadConfig:
      return 3;
    case ErrorKind::AllWeightsUnderflow:
    case ErrorKind::GridTooCoarse:
    case ErrorKind::Internal:
      return 1;
    default:
      return 2;
  }
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message),
        kind_(kind) {}

  ErrorKind kind() const { return kind_; }
  int exit_code() const { return bt::exit_code(kind_); }

 private:
  ErrorKind kind_;
};

}  // namespace bt
