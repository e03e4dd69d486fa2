#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace mechforce {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed expression source. Line and column are 1-based.
class ParseError : public Error {
 public:
  ParseError(const std::string& message, std::size_t line, std::size_t column)
      : Error(message + " at " + std::to_string(line) + ":" +
              std::to_string(column)),
        line_(line),
        column_(column) {}

  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

/// Evaluation produced NaN or infinity, or left the domain of a function.
class NonFiniteError : public Error {
 public:
  using Error::Error;
};

/// Sizes of charts, points or component lists do not agree.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// A matrix that must be invertible is (numerically) singular.
class SingularError : public Error {
 public:
  using Error::Error;
};

/// An iterative solve did not meet its tolerance.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& message, double residual)
      : Error(message + " (last residual " + std::to_string(residual) + ")"),
        residual_(residual) {}

  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

/// A symmetry hypothesis (invariance, connection invariance) fails.
class InvarianceError : public Error {
 public:
  using Error::Error;
};

}  // namespace mechforce
