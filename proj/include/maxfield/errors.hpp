#pragma once

// Exception hierarchy shared by all maxfield components.  Every error carries a
// stable machine-readable code so the CLI can report failures without parsing
// message text.

#include <stdexcept>
#include <string>

namespace maxfield {

enum class ErrorCode {
  DuplicatePoint,
  OutOfDomain,
  BackendArity,
  InvalidSigma,
  NotStandardized,
  FactorizationFailure,
  DomainError,
  BadGrid,
  NeedTwoPoints,
  InvalidBandwidth,
  AllWeightsZero,
  NonNegativeObservation,
  QuadratureFailure,
  BadSequence,
  InvariantViolation,
  ConfigError,
  ExecutionError,
};

inline const char* error_code_name(ErrorCode c) {
  switch (c) {
    case ErrorCode::DuplicatePoint: return "DuplicatePoint";
    case ErrorCode::OutOfDomain: return "OutOfDomain";
    case ErrorCode::BackendArity: return "BackendArity";
    case ErrorCode::InvalidSigma: return "InvalidSigma";
    case ErrorCode::NotStandardized: return "NotStandardized";
    case ErrorCode::FactorizationFailure: return "FactorizationFailure";
    case ErrorCode::DomainError: return "DomainError";
    case ErrorCode::BadGrid: return "BadGrid";
    case ErrorCode::NeedTwoPoints: return "NeedTwoPoints";
    case ErrorCode::InvalidBandwidth: return "InvalidBandwidth";
    case ErrorCode::AllWeightsZero: return "AllWeightsZero";
    case ErrorCode::NonNegativeObservation: return "NonNegativeObservation";
    case ErrorCode::QuadratureFailure: return "QuadratureFailure";
    case ErrorCode::BadSequence: return "BadSequence";
    case ErrorCode::InvariantViolation: return "InvariantViolation";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::ExecutionError: return "ExecutionError";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + what),
        code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

#define MAXFIELD_DEFINE_ERROR(Name)                       \
  struct Name : Error {                                   \
    explicit Name(const std::string& what)                \
        : Error(ErrorCode::Name, what) {}                 \
  }

MAXFIELD_DEFINE_ERROR(DuplicatePoint);
MAXFIELD_DEFINE_ERROR(OutOfDomain);
MAXFIELD_DEFINE_ERROR(BackendArity);
MAXFIELD_DEFINE_ERROR(InvalidSigma);
MAXFIELD_DEFINE_ERROR(NotStandardized);
MAXFIELD_DEFINE_ERROR(FactorizationFailure);
MAXFIELD_DEFINE_ERROR(DomainError);
MAXFIELD_DEFINE_ERROR(BadGrid);
MAXFIELD_DEFINE_ERROR(NeedTwoPoints);
MAXFIELD_DEFINE_ERROR(InvalidBandwidth);
MAXFIELD_DEFINE_ERROR(AllWeightsZero);
MAXFIELD_DEFINE_ERROR(NonNegativeObservation);
MAXFIELD_DEFINE_ERROR(QuadratureFailure);
MAXFIELD_DEFINE_ERROR(BadSequence);
MAXFIELD_DEFINE_ERROR(InvariantViolation);
MAXFIELD_DEFINE_ERROR(ConfigError);
MAXFIELD_DEFINE_ERROR(ExecutionError);

#undef MAXFIELD_DEFINE_ERROR

}  // namespace maxfield
