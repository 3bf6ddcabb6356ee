#include "oradius/error.hpp"

namespace oradius {

std::string_view kind_name(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::NotHermitian: return "NotHermitian";
    case ErrorKind::DomainError: return "DomainError";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::NonFinite: return "NonFinite";
    case ErrorKind::Overflow: return "Overflow";
    case ErrorKind::NegativeArgument: return "NegativeArgument";
    case ErrorKind::NotConvex: return "NotConvex";
    case ErrorKind::MaximizerUnbounded: return "MaximizerUnbounded";
    case ErrorKind::ToleranceUnreachable: return "ToleranceUnreachable";
    case ErrorKind::UnknownBound: return "UnknownBound";
    case ErrorKind::MissingInput: return "MissingInput";
    case ErrorKind::ParamOutOfRange: return "ParamOutOfRange";
    case ErrorKind::NotPSD: return "NotPSD";
    case ErrorKind::NotContraction: return "NotContraction";
    case ErrorKind::NotSubmultiplicative: return "NotSubmultiplicative";
    case ErrorKind::NotCommuting: return "NotCommuting";
    case ErrorKind::IncomparableBounds: return "IncomparableBounds";
    case ErrorKind::UnknownEnsemble: return "UnknownEnsemble";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::IoError: return "IoError";
  }
  return "Unknown";
}

Error::Error(ErrorKind kind, const std::string& detail)
    : std::runtime_error(std::string(kind_name(kind)) + ": " + detail), kind_(kind) {}

}  // namespace oradius
