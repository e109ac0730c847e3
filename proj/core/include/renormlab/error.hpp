#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace renormlab {

enum class ErrorCode {
  OddN,
  TooSmallN,
  BadDimension,
  BadLength,
  GridMismatch,
  EpsilonOutOfRange,
  OrderTooHigh,
  BadExponent,
  BadIndex,
  TooFewSamples,
  BadTimeGrid,
  NegativeTime,
  BadLambda,
  NotConverged,
  NonIntegralSteps,
  TrajectoryFailure,
  NotInjective,
  NewtonStagnation,
  EmptyEnsemble,
  SupportViolation,
  BadRenormalizer,
  LipTooLarge,
  InversionStagnation,
  MissingData,
  Io,
  Config,
};

std::string_view to_string(ErrorCode code);

/// Every failure raised by the library carries a machine-readable code.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what);
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] void fail(ErrorCode code, const std::string& what);

}  // namespace renormlab
