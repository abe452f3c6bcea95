#include "hexweb/errors.hpp"

namespace hexweb {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::DegenerateMetric: return "DegenerateMetric";
    case ErrorKind::NotWebAdapted: return "NotWebAdapted";
    case ErrorKind::LeadingCoefficientZero: return "LeadingCoefficientZero";
    case ErrorKind::DenominatorBlowup: return "DenominatorBlowup";
    case ErrorKind::ComplexSpeeds: return "ComplexSpeeds";
    case ErrorKind::NonInvertibleInvariantChart: return "NonInvertibleInvariantChart";
    case ErrorKind::CoincidingSpeeds: return "CoincidingSpeeds";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::NotASolution: return "NotASolution";
    case ErrorKind::CalibrationAmbiguous: return "CalibrationAmbiguous";
    case ErrorKind::DomainExit: return "DomainExit";
    case ErrorKind::StepFailure: return "StepFailure";
    case ErrorKind::ComplexRoots: return "ComplexRoots";
    case ErrorKind::RepeatedRoots: return "RepeatedRoots";
    case ErrorKind::NonTransversal: return "NonTransversal";
    case ErrorKind::PositivityViolation: return "PositivityViolation";
    case ErrorKind::DeltaVanished: return "DeltaVanished";
    case ErrorKind::ConstraintDrift: return "ConstraintDrift";
    case ErrorKind::NoRoot: return "NoRoot";
    case ErrorKind::NewtonDiverged: return "NewtonDiverged";
    case ErrorKind::LinearSolveSingular: return "LinearSolveSingular";
    case ErrorKind::NegativeDiscriminant: return "NegativeDiscriminant";
    case ErrorKind::IntervalExhausted: return "IntervalExhausted";
    case ErrorKind::NoRealIntersection: return "NoRealIntersection";
    case ErrorKind::SlopeAmbiguity: return "SlopeAmbiguity";
    case ErrorKind::ExcludedRho: return "ExcludedRho";
    case ErrorKind::ZeroInitialSlope: return "ZeroInitialSlope";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::ValidationError: return "ValidationError";
    case ErrorKind::IoError: return "IoError";
  }
  return "Unknown";
}

Error::Error(ErrorKind kind, const std::string& message, std::optional<Witness> where)
    : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind), detail_(message), where_(where) {}

}  // namespace hexweb
