#pragma once

#include <limits>
#include <stdexcept>
#include <string>

namespace ebmlab {

enum class ErrorKind {
  kSizeMismatch,
  kInvalidDistribution,
  kSupportViolation,
  kBoundaryDivergence,
  kZeroStationaryMass,
  kNonPositiveBeta,
  kInvalidScenario,
  kDisconnectedGraph,
  kAsymmetricSupport,
  kCycleInconsistency,
  kSingularSystem,
  kEmptyTargetSet,
  kNotReversible,
  kNoConvergence,
  kDegenerateGap,
  kNegativeLambda,
  kInvalidFamily,
  kIoFailure,
};

constexpr const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kSizeMismatch: return "SizeMismatch";
    case ErrorKind::kInvalidDistribution: return "InvalidDistribution";
    case ErrorKind::kSupportViolation: return "SupportViolation";
    case ErrorKind::kBoundaryDivergence: return "BoundaryDivergence";
    case ErrorKind::kZeroStationaryMass: return "ZeroStationaryMass";
    case ErrorKind::kNonPositiveBeta: return "NonPositiveBeta";
    case ErrorKind::kInvalidScenario: return "InvalidScenario";
    case ErrorKind::kDisconnectedGraph: return "DisconnectedGraph";
    case ErrorKind::kAsymmetricSupport: return "AsymmetricSupport";
    case ErrorKind::kCycleInconsistency: return "CycleInconsistency";
    case ErrorKind::kSingularSystem: return "SingularSystem";
    case ErrorKind::kEmptyTargetSet: return "EmptyTargetSet";
    case ErrorKind::kNotReversible: return "NotReversible";
    case ErrorKind::kNoConvergence: return "NoConvergence";
    case ErrorKind::kDegenerateGap: return "DegenerateGap";
    case ErrorKind::kNegativeLambda: return "NegativeLambda";
    case ErrorKind::kInvalidFamily: return "InvalidFamily";
    case ErrorKind::kIoFailure: return "IoFailure";
  }
  return "Unknown";
}

/// NoConvergence and SingularSystem are solver failures rather than broken
/// invariants; the CLI maps them to their own exit code.
constexpr bool is_numerical_failure(ErrorKind kind) {
  return kind == ErrorKind::kNoConvergence || kind == ErrorKind::kSingularSystem;
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what,
        double residual = std::numeric_limits<double>::quiet_NaN())
      : std::runtime_error(std::string(to_string(kind)) + ": " + what),
        kind_(kind),
        residual_(residual) {}

  ErrorKind kind() const noexcept { return kind_; }
  /// Worst residual that triggered the error, NaN when not applicable.
  double residual() const noexcept { return residual_; }

 private:
  ErrorKind kind_;
  double residual_;
};

}  // namespace ebmlab
