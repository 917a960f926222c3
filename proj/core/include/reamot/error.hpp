#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace reamot {

// Root of every error the toolkit raises. The CLI maps subclasses onto exit
// codes, so new failure kinds should derive from the closest existing one.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A value violates a type invariant (malformed box, out-of-range score...).
class ValidationError : public Error {
 public:
  using Error::Error;
};

// Text input could not be parsed. `line()` is 1-based; 0 when not applicable.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error(line == 0 ? what : "line " + std::to_string(line) + ": " + what),
        line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

// A required file or directory is missing or unreadable.
class LoadError : public Error {
 public:
  using Error::Error;
};

// Individually valid inputs that disagree with each other.
class ConsistencyError : public Error {
 public:
  using Error::Error;
};

// Frames fed to the tracker out of order.
class SequencingError : public Error {
 public:
  using Error::Error;
};

// External propagator broke the line protocol.
class ProtocolError : public Error {
 public:
  using Error::Error;
};

// Aggregation was asked to average over zero instructions.
class EmptyEvaluationError : public Error {
 public:
  using Error::Error;
};

}  // namespace reamot
