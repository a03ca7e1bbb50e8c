#include "anyact/error.hpp"

namespace anyact {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::NonFiniteParameter: return "NonFiniteParameter";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::SchemaError: return "SchemaError";
    case ErrorKind::UnknownActivation: return "UnknownActivation";
    case ErrorKind::InvalidParameter: return "InvalidParameter";
    case ErrorKind::AtKink: return "AtKink";
    case ErrorKind::NotInA: return "NotInA";
    case ErrorKind::LimitMismatch: return "LimitMismatch";
    case ErrorKind::Overflow: return "Overflow";
    case ErrorKind::EtaTooSmall: return "EtaTooSmall";
    case ErrorKind::EpsTooSmall: return "EpsTooSmall";
    case ErrorKind::NoSlopePoint: return "NoSlopePoint";
    case ErrorKind::NoCurvaturePoint: return "NoCurvaturePoint";
    case ErrorKind::CalibrationFailed: return "CalibrationFailed";
    case ErrorKind::Unbounded: return "Unbounded";
    case ErrorKind::NotA2Tilde: return "NotA2tilde";
    case ErrorKind::NotReLUHost: return "NotReLUHost";
    case ErrorKind::UnfusableGadget: return "UnfusableGadget";
  }
  return "Unknown";
}

Error::Error(ErrorKind kind, const std::string& message, ErrorContext ctx)
    : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind), ctx_(ctx) {}

}  // namespace anyact
