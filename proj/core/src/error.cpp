#include "renormlab/error.hpp"

namespace renormlab {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::OddN: return "OddN";
    case ErrorCode::TooSmallN: return "TooSmallN";
    case ErrorCode::BadDimension: return "BadDimension";
    case ErrorCode::BadLength: return "BadLength";
    case ErrorCode::GridMismatch: return "GridMismatch";
    case ErrorCode::EpsilonOutOfRange: return "EpsilonOutOfRange";
    case ErrorCode::OrderTooHigh: return "OrderTooHigh";
    case ErrorCode::BadExponent: return "BadExponent";
    case ErrorCode::BadIndex: return "BadIndex";
    case ErrorCode::TooFewSamples: return "TooFewSamples";
    case ErrorCode::BadTimeGrid: return "BadTimeGrid";
    case ErrorCode::NegativeTime: return "NegativeTime";
    case ErrorCode::BadLambda: return "BadLambda";
    case ErrorCode::NotConverged: return "NotConverged";
    case ErrorCode::NonIntegralSteps: return "NonIntegralSteps";
    case ErrorCode::TrajectoryFailure: return "TrajectoryFailure";
    case ErrorCode::NotInjective: return "NotInjective";
    case ErrorCode::NewtonStagnation: return "NewtonStagnation";
    case ErrorCode::EmptyEnsemble: return "EmptyEnsemble";
    case ErrorCode::SupportViolation: return "SupportViolation";
    case ErrorCode::BadRenormalizer: return "BadRenormalizer";
    case ErrorCode::LipTooLarge: return "LipTooLarge";
    case ErrorCode::InversionStagnation: return "InversionStagnation";
    case ErrorCode::MissingData: return "MissingData";
    case ErrorCode::Io: return "Io";
    case ErrorCode::Config: return "Config";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& what)
    : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

}  // namespace renormlab
