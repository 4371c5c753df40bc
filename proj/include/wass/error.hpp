#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace wass {

enum class ErrorKind {
  InvalidArgument,
  MalformedFile,
  NonFiniteValue,
  EmptyFile,
  IoError,
  DimensionMismatch,
  InfeasibleMarginals,
  SolverFailure,
  SupportMismatch,
  TooManyClasses,
  NumericalUnderflow,
  DegenerateInput,
  UnknownLabel,
  AllZeroProbabilities,
  InvalidK,
  InsufficientSamples,
  RowNotSimplex,
  InvalidOverlap,
};

std::string_view to_string(ErrorKind kind);

/// Every failure raised by the library carries one of the kinds above so that
/// callers (and the CLI) can branch without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message);

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] void fail(ErrorKind kind, const std::string& message);

}  // namespace wass
