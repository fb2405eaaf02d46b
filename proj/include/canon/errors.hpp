#pragma once

#include <stdexcept>
#include <string>

namespace canon {

// Error kinds are part of the public contract: callers branch on them and
// tests assert them.  Messages carry the numeric context.
enum class ErrorKind {
  ZeroInterval,
  NonFiniteSlope,
  UnsupportedConvolution,
  DivergentNormalizer,
  UnboundedBelow,
  UnboundedAbove,
  EmptyWindow,
  UnsupportedDependence,
  NonFiniteConditional,
  TooFewAccepted,
  GridMismatch,
  DivergentMGF,
  MeanInsideWindow,
  InfeasibleMean,
  HypothesisViolated,
  NonPositiveValue,
  BadConfig,
  IoError,
};

const char* to_string(ErrorKind k);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what),
        kind_(kind) {}
  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) {
  throw Error(kind, what);
}

}  // namespace canon
