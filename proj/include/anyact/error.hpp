#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace anyact {

enum class ErrorKind {
  DimensionMismatch,
  NonFiniteParameter,
  ParseError,
  SchemaError,
  UnknownActivation,
  InvalidParameter,
  AtKink,
  NotInA,
  LimitMismatch,
  Overflow,
  EtaTooSmall,
  EpsTooSmall,
  NoSlopePoint,
  NoCurvaturePoint,
  CalibrationFailed,
  Unbounded,
  NotA2Tilde,
  NotReLUHost,
  UnfusableGadget,
};

std::string_view to_string(ErrorKind kind) noexcept;

// Optional structured payload. Which fields are set depends on the kind:
// layer index for DimensionMismatch, layer + position for NonFiniteParameter,
// best achieved error for CalibrationFailed, offending x for AtKink, ...
struct ErrorContext {
  std::optional<std::size_t> index;
  std::optional<std::size_t> position;
  std::optional<double> value;
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message, ErrorContext ctx = {});

  ErrorKind kind() const noexcept { return kind_; }
  const ErrorContext& context() const noexcept { return ctx_; }

 private:
  ErrorKind kind_;
  ErrorContext ctx_;
};

}  // namespace anyact
