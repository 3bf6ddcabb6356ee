#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace oradius {

enum class ErrorKind {
  NotHermitian,
  DomainError,
  DimensionMismatch,
  NonFinite,
  Overflow,
  NegativeArgument,
  NotConvex,
  MaximizerUnbounded,
  ToleranceUnreachable,
  UnknownBound,
  MissingInput,
  ParamOutOfRange,
  NotPSD,
  NotContraction,
  NotSubmultiplicative,
  NotCommuting,
  IncomparableBounds,
  UnknownEnsemble,
  ParseError,
  IoError,
};

std::string_view kind_name(ErrorKind kind) noexcept;

/// Library-wide exception. what() is "<KindName>: <detail>".
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& detail);

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace oradius
