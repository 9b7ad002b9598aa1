#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace rodflow {

enum class ErrorKind {
  MissingField,
  NonPositiveCoefficient,
  KernelNormalizationFailure,
  BoundViolation,
  TruncationTail,
  UnsupportedDomainPairing,
  OdeToleranceExceeded,
  PointLeftDomain,
  TimestepTooLarge,
  NegativeMonomerInput,
  NegativeSink,
  SolverDiverged,
  InvariantBreach,
  ConfigurationNotDegenerate,
  ProvenanceMismatch,
  InvalidConfig,
  FormatError,
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::MissingField: return "MissingField";
    case ErrorKind::NonPositiveCoefficient: return "NonPositiveCoefficient";
    case ErrorKind::KernelNormalizationFailure: return "KernelNormalizationFailure";
    case ErrorKind::BoundViolation: return "BoundViolation";
    case ErrorKind::TruncationTail: return "TruncationTail";
    case ErrorKind::UnsupportedDomainPairing: return "UnsupportedDomainPairing";
    case ErrorKind::OdeToleranceExceeded: return "OdeToleranceExceeded";
    case ErrorKind::PointLeftDomain: return "PointLeftDomain";
    case ErrorKind::TimestepTooLarge: return "TimestepTooLarge";
    case ErrorKind::NegativeMonomerInput: return "NegativeMonomerInput";
    case ErrorKind::NegativeSink: return "NegativeSink";
    case ErrorKind::SolverDiverged: return "SolverDiverged";
    case ErrorKind::InvariantBreach: return "InvariantBreach";
    case ErrorKind::ConfigurationNotDegenerate: return "ConfigurationNotDegenerate";
    case ErrorKind::ProvenanceMismatch: return "ProvenanceMismatch";
    case ErrorKind::InvalidConfig: return "InvalidConfig";
    case ErrorKind::FormatError: return "FormatError";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// A monitored property failed at a given step.
class InvariantBreachError : public Error {
 public:
  InvariantBreachError(std::string name, long step, double magnitude)
      : Error(ErrorKind::InvariantBreach,
              name + " violated at step " + std::to_string(step) + " (magnitude " +
                  std::to_string(magnitude) + ")"),
        name_(std::move(name)),
        step_(step),
        magnitude_(magnitude) {}

  const std::string& name() const noexcept { return name_; }
  long step() const noexcept { return step_; }
  double magnitude() const noexcept { return magnitude_; }

 private:
  std::string name_;
  long step_;
  double magnitude_;
};

/// Krylov solve that failed to reach its tolerance; keeps the residual history.
class SolverDivergedError : public Error {
 public:
  SolverDivergedError(const std::string& message, std::vector<double> trace)
      : Error(ErrorKind::SolverDiverged, message), trace_(std::move(trace)) {}

  const std::vector<double>& residual_trace() const noexcept { return trace_; }

 private:
  std::vector<double> trace_;
};

/// Process exit status for an error: 1 for bad input, 2 for a stability or
/// invariant failure (including a rejected step size), 3 for a numerical
/// solver failure.
inline int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::TimestepTooLarge:
    case ErrorKind::InvariantBreach:
    case ErrorKind::BoundViolation:
    case ErrorKind::TruncationTail:
    case ErrorKind::NegativeMonomerInput:
    case ErrorKind::NegativeSink:
    case ErrorKind::PointLeftDomain:
      return 2;
    case ErrorKind::SolverDiverged:
    case ErrorKind::OdeToleranceExceeded:
      return 3;
    default:
      return 1;
  }
}

inline void require(bool condition, ErrorKind kind, const std::string& message) {
  if (!condition) throw Error(kind, message);
}

}  // namespace rodflow
