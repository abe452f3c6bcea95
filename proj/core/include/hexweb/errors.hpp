#pragma once

#include <optional>
#include <stdexcept>
#include <string>

namespace hexweb {

enum class ErrorKind {
  DegenerateMetric,
  NotWebAdapted,
  LeadingCoefficientZero,
  DenominatorBlowup,
  ComplexSpeeds,
  NonInvertibleInvariantChart,
  CoincidingSpeeds,
  InvalidArgument,
  NotASolution,
  CalibrationAmbiguous,
  DomainExit,
  StepFailure,
  ComplexRoots,
  RepeatedRoots,
  NonTransversal,
  PositivityViolation,
  DeltaVanished,
  ConstraintDrift,
  NoRoot,
  NewtonDiverged,
  LinearSolveSingular,
  NegativeDiscriminant,
  IntervalExhausted,
  NoRealIntersection,
  SlopeAmbiguity,
  ExcludedRho,
  ZeroInitialSlope,
  ParseError,
  ValidationError,
  IoError,
};

const char* to_string(ErrorKind kind);

struct Witness {
  double u = 0.0;
  double v = 0.0;
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message, std::optional<Witness> where = std::nullopt);

  ErrorKind kind() const { return kind_; }
  const std::optional<Witness>& witness() const { return where_; }
  // Message without the kind prefix.
  const std::string& detail() const { return detail_; }

 private:
  ErrorKind kind_;
  std::string detail_;
  std::optional<Witness> where_;
};

}  // namespace hexweb
