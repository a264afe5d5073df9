#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace plap {

enum class ErrorCode {
  PreconditionViolation,
  DegenerateDomain,
  PoleOutsideDomain,
  EmptyRing,
  InvalidExponent,
  MeshMismatch,
  NewtonDivergence,
  SupercriticalLambda,
  EqualArguments,
  AtPole,
  UnresolvedMollifier,
  ScheduleTooAggressive,
  PoorFit,
  NonconvergentQuadrature,
  UnresolvedGradient,
  NonpositiveSigma,
  NegativeShiftedField,
  NegativeField,
  DegenerateBase,
  HypothesisViolated,
  QuadratureFailure,
  ShootingDivergence,
  ZeroField,
  UnresolvableEpsilonRange,
  NoSignChange,
  ConfigError,
  IoError,
};

std::string_view to_string(ErrorCode code);

/// Every failure raised by the toolkit carries one of the codes above so that
/// callers (and the CLI exit path) can dispatch without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what);
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] void raise(ErrorCode code, const std::string& what);

inline void require(bool cond, ErrorCode code, const std::string& what) {
  if (!cond) raise(code, what);
}

}  // namespace plap
