#pragma once

#include <stdexcept>
#include <string>

namespace tsdr {

enum class ErrorKind {
  InvalidMatrix,
  DimensionError,
  NotPositiveDefinite,
  GroupTooSmall,
  EmptyData,
  ThresholdTooEarly,
  ThresholdTooLate,
  CensoringSupportViolated,
  ModelMisconfigured,
  MissingStatus,
  ParseError,
  TooFewRows,
  ConfigError,
};

const char* to_string(ErrorKind kind);

// Single exception type for the library; callers switch on kind().
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class NotPositiveDefiniteError : public Error {
 public:
  NotPositiveDefiniteError(double eigenvalue, const std::string& what)
      : Error(ErrorKind::NotPositiveDefinite, what), eigenvalue_(eigenvalue) {}

  double eigenvalue() const noexcept { return eigenvalue_; }

 private:
  double eigenvalue_;
};

class ParseError : public Error {
 public:
  ParseError(std::size_t line, std::size_t column, const std::string& what)
      : Error(ErrorKind::ParseError,
              "line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + what),
        line_(line),
        column_(column) {}

  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

class CensoringSupportError : public Error {
 public:
  CensoringSupportError(std::size_t observation, const std::string& what)
      : Error(ErrorKind::CensoringSupportViolated, what), observation_(observation) {}

  std::size_t observation() const noexcept { return observation_; }

 private:
  std::size_t observation_;
};

}  // namespace tsdr
