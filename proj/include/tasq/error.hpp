#pragma once

#include <stdexcept>
#include <string>

namespace tasq {

enum class ErrorKind {
  InvalidSkyline,
  InvalidThreshold,
  InvalidCurve,
  InvalidDag,
  InfeasibleCap,
  InfeasibleSelection,
  InsufficientData,
  InsufficientGrid,
  DomainError,
  ShapeError,
  EmptyInput,
  EmptyJob,
  ConfigError,
  ParseError,
  IoError,
  VersionMismatch,
  TrainingDiverged,
};

const char* to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidSkyline: return "invalid-skyline";
    case ErrorKind::InvalidThreshold: return "invalid-threshold";
    case ErrorKind::InvalidCurve: return "invalid-curve";
    case ErrorKind::InvalidDag: return "invalid-dag";
    case ErrorKind::InfeasibleCap: return "infeasible-cap";
    case ErrorKind::InfeasibleSelection: return "infeasible-selection";
    case ErrorKind::InsufficientData: return "insufficient-data";
    case ErrorKind::InsufficientGrid: return "insufficient-grid";
    case ErrorKind::DomainError: return "domain-error";
    case ErrorKind::ShapeError: return "shape-error";
    case ErrorKind::EmptyInput: return "empty-input";
    case ErrorKind::EmptyJob: return "empty-job";
    case ErrorKind::ConfigError: return "config-error";
    case ErrorKind::ParseError: return "parse-error";
    case ErrorKind::IoError: return "io-error";
    case ErrorKind::VersionMismatch: return "version-mismatch";
    case ErrorKind::TrainingDiverged: return "training-diverged";
  }
  return "error";
}

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) {
  throw Error(kind, message);
}

}  // namespace tasq
