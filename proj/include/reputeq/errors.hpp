#ifndef REPUTEQ_ERRORS_HPP
#define REPUTEQ_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace reputeq {

enum class ErrorKind {
  NonPositiveParameter,
  ParameterOutOfRange,
  TypeOrderViolation,
  GammaOutOfRange,
  DeltaTooLow,
  MeshOutOfRange,
  AssumptionViolation,
  Infeasible,
  StateOffPath,
  LengthTooLarge,
  EmptyTrace,
  EpsilonTooSmallForDelta,
  ParseError,
  ValidationError,
};

inline const char* error_kind_name(ErrorKind k) {
  switch (k) {
    case ErrorKind::NonPositiveParameter: return "NonPositiveParameter";
    case ErrorKind::ParameterOutOfRange: return "ParameterOutOfRange";
    case ErrorKind::TypeOrderViolation: return "TypeOrderViolation";
    case ErrorKind::GammaOutOfRange: return "GammaOutOfRange";
    case ErrorKind::DeltaTooLow: return "DeltaTooLow";
    case ErrorKind::MeshOutOfRange: return "MeshOutOfRange";
    case ErrorKind::AssumptionViolation: return "AssumptionViolation";
    case ErrorKind::Infeasible: return "Infeasible";
    case ErrorKind::StateOffPath: return "StateOffPath";
    case ErrorKind::LengthTooLarge: return "LengthTooLarge";
    case ErrorKind::EmptyTrace: return "EmptyTrace";
    case ErrorKind::EpsilonTooSmallForDelta: return "EpsilonTooSmallForDelta";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::ValidationError: return "ValidationError";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(error_kind_name(kind)) + ": " + what),
        kind_(kind) {}
  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace reputeq

#endif  // REPUTEQ_ERRORS_HPP
