#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace gsindy {

enum class ErrorKind {
  InvalidArgument,     // bad parameters, usage or validation failure
  InvalidState,        // non-finite state handed to a model
  NonFiniteInput,      // non-finite sample in a data matrix
  IntegrationFailure,  // step-size underflow or blow-up
  IllConditioned,      // singular normal equations
  EmptyModel,          // every free coefficient thresholded away
  Infeasible,          // inconsistent equality constraints
  DuplicateTerm,
  DegenerateTrack,     // zero-variance pellet track
  Parse,               // malformed input file
  Io,
};

const char* to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// Raised when an integration cannot proceed. Carries the last time at which
/// the state was still valid.
class IntegrationError : public Error {
 public:
  IntegrationError(const std::string& what, double last_valid_time)
      : Error(ErrorKind::IntegrationFailure, what), last_valid_time_(last_valid_time) {}

  double last_valid_time() const noexcept { return last_valid_time_; }

 private:
  double last_valid_time_;
};

/// Non-finite value found while evaluating a data matrix.
class NonFiniteRowError : public Error {
 public:
  NonFiniteRowError(const std::string& what, std::size_t row)
      : Error(ErrorKind::NonFiniteInput, what), row_(row) {}

  std::size_t row() const noexcept { return row_; }

 private:
  std::size_t row_;
};

/// Parse failure in a text input; `line` is 1-based, 0 when unknown.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : Error(ErrorKind::Parse, what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace gsindy
