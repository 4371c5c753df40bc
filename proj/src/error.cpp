#include "wass/error.hpp"

namespace wass {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::MalformedFile: return "MalformedFile";
    case ErrorKind::NonFiniteValue: return "NonFiniteValue";
    case ErrorKind::EmptyFile: return "EmptyFile";
    case ErrorKind::IoError: return "IoError";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::InfeasibleMarginals: return "InfeasibleMarginals";
    case ErrorKind::SolverFailure: return "SolverFailure";
    case ErrorKind::SupportMismatch: return "SupportMismatch";
    case ErrorKind::TooManyClasses: return "TooManyClasses";
    case ErrorKind::NumericalUnderflow: return "NumericalUnderflow";
    case ErrorKind::DegenerateInput: return "DegenerateInput";
    case ErrorKind::UnknownLabel: return "UnknownLabel";
    case ErrorKind::AllZeroProbabilities: return "AllZeroProbabilities";
    case ErrorKind::InvalidK: return "InvalidK";
    case ErrorKind::InsufficientSamples: return "InsufficientSamples";
    case ErrorKind::RowNotSimplex: return "RowNotSimplex";
    case ErrorKind::InvalidOverlap: return "InvalidOverlap";
  }
  return "Unknown";
}

Error::Error(ErrorKind kind, const std::string& message)
    : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

void fail(ErrorKind kind, const std::string& message) { throw Error(kind, message); }

}  // namespace wass
