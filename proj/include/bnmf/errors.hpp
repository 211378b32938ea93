#pragma once

#include <stdexcept>
#include <string>

namespace bnmf {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Operand shapes do not conform.
class DimensionError : public Error {
  public:
    using Error::Error;
};

/// An operation needs at least one observed entry and got none.
class EmptyMaskError : public Error {
  public:
    using Error::Error;
};

/// A distribution or model parameter is outside its valid range.
class ParameterError : public Error {
  public:
    using Error::Error;
};

/// An experiment schedule or run configuration is inconsistent.
class ConfigError : public Error {
  public:
    using Error::Error;
};

/// Malformed input file (ragged rows, empty file, unreadable path).
class FormatError : public Error {
  public:
    using Error::Error;
};

/// A cell could not be parsed as a number.
class ParseError : public FormatError {
  public:
    ParseError(const std::string& what, std::size_t row, std::size_t col)
        : FormatError(what), row_(row), col_(col) {}

    std::size_t row() const noexcept { return row_; }
    std::size_t col() const noexcept { return col_; }

  private:
    std::size_t row_;
    std::size_t col_;
};

/// Data value outside the domain the model accepts (e.g. negative entries).
class DomainError : public Error {
  public:
    using Error::Error;
};

/// A sampler produced or received a non-finite quantity mid-chain.
class NumericalError : public Error {
  public:
    using Error::Error;
};

} // namespace bnmf
