#include "plap/error.hpp"

namespace plap {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::PreconditionViolation: return "PreconditionViolation";
    case ErrorCode::DegenerateDomain: return "DegenerateDomain";
    case ErrorCode::PoleOutsideDomain: return "PoleOutsideDomain";
    case ErrorCode::EmptyRing: return "EmptyRing";
    case ErrorCode::InvalidExponent: return "InvalidExponent";
    case ErrorCode::MeshMismatch: return "MeshMismatch";
    case ErrorCode::NewtonDivergence: return "NewtonDivergence";
    case ErrorCode::SupercriticalLambda: return "SupercriticalLambda";
    case ErrorCode::EqualArguments: return "EqualArguments";
    case ErrorCode::AtPole: return "AtPole";
    case ErrorCode::UnresolvedMollifier: return "UnresolvedMollifier";
    case ErrorCode::ScheduleTooAggressive: return "ScheduleTooAggressive";
    case ErrorCode::PoorFit: return "PoorFit";
    case ErrorCode::NonconvergentQuadrature: return "NonconvergentQuadrature";
    case ErrorCode::UnresolvedGradient: return "UnresolvedGradient";
    case ErrorCode::NonpositiveSigma: return "NonpositiveSigma";
    case ErrorCode::NegativeShiftedField: return "NegativeShiftedField";
    case ErrorCode::NegativeField: return "NegativeField";
    case ErrorCode::DegenerateBase: return "DegenerateBase";
    case ErrorCode::HypothesisViolated: return "HypothesisViolated";
    case ErrorCode::QuadratureFailure: return "QuadratureFailure";
    case ErrorCode::ShootingDivergence: return "ShootingDivergence";
    case ErrorCode::ZeroField: return "ZeroField";
    case ErrorCode::UnresolvableEpsilonRange: return "UnresolvableEpsilonRange";
    case ErrorCode::NoSignChange: return "NoSignChange";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& what)
    : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

void raise(ErrorCode code, const std::string& what) { throw Error(code, what); }

}  // namespace plap
