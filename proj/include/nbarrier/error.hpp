#pragma once

#include <stdexcept>
#include <string>

namespace nbarrier {

/// Failure codes shared across the library. Every thrown nbarrier::Error
/// carries one of these so callers can branch without string matching.
enum class Errc {
  DomainError,        // argument outside the documented domain
  NegativeCoordinate, // point left the nonnegative orthant
  NotAnEquilibrium,   // residual of defining equations exceeds tolerance
  DimensionMismatch,
  EmptyNullcline,     // field has no sign change in the bounding box
  DegenerateFit,      // enclosing fit has zero/unbounded intercept
  OrderViolation,     // upper intercept <= lower intercept after fitting
  NoConvergence,
  JacobianSingular,
  PhaseDegenerate,    // no component distinguishes the two endpoints
  BlowUp,
  FrontTooClose,
  NoCrossing,
  ConfigError,
};

const char* to_string(Errc code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message),
        code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace nbarrier
