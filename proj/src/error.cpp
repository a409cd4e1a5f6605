#include "nbarrier/error.hpp"

namespace nbarrier {

const char* to_string(Errc code) noexcept {
  switch (code) {
    case Errc::DomainError: return "DomainError";
    case Errc::NegativeCoordinate: return "NegativeCoordinate";
    case Errc::NotAnEquilibrium: return "NotAnEquilibrium";
    case Errc::DimensionMismatch: return "DimensionMismatch";
    case Errc::EmptyNullcline: return "EmptyNullcline";
    case Errc::DegenerateFit: return "DegenerateFit";
    case Errc::OrderViolation: return "OrderViolation";
    case Errc::NoConvergence: return "NoConvergence";
    case Errc::JacobianSingular: return "JacobianSingular";
    case Errc::PhaseDegenerate: return "PhaseDegenerate";
    case Errc::BlowUp: return "BlowUp";
    case Errc::FrontTooClose: return "FrontTooClose";
    case Errc::NoCrossing: return "NoCrossing";
    case Errc::ConfigError: return "ConfigError";
  }
  return "UnknownError";
}

}  // namespace nbarrier
