#include "canon/errors.hpp"

namespace canon {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::ZeroInterval: return "ZeroInterval";
    case ErrorKind::NonFiniteSlope: return "NonFiniteSlope";
    case ErrorKind::UnsupportedConvolution: return "UnsupportedConvolution";
    case ErrorKind::DivergentNormalizer: return "DivergentNormalizer";
    case ErrorKind::UnboundedBelow: return "UnboundedBelow";
    case ErrorKind::UnboundedAbove: return "UnboundedAbove";
    case ErrorKind::EmptyWindow: return "EmptyWindow";
    case ErrorKind::UnsupportedDependence: return "UnsupportedDependence";
    case ErrorKind::NonFiniteConditional: return "NonFiniteConditional";
    case ErrorKind::TooFewAccepted: return "TooFewAccepted";
    case ErrorKind::GridMismatch: return "GridMismatch";
    case ErrorKind::DivergentMGF: return "DivergentMGF";
    case ErrorKind::MeanInsideWindow: return "MeanInsideWindow";
    case ErrorKind::InfeasibleMean: return "InfeasibleMean";
    case ErrorKind::HypothesisViolated: return "HypothesisViolated";
    case ErrorKind::NonPositiveValue: return "NonPositiveValue";
    case ErrorKind::BadConfig: return "BadConfig";
    case ErrorKind::IoError: return "IoError";
  }
  return "UnknownError";
}

}  // namespace canon
