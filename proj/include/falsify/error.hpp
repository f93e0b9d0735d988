#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace falsify {

class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Malformed text input. Line and column are 1-based; 0 means unknown.
class ParseError : public Error {
public:
  ParseError(const std::string &what, std::size_t line = 0, std::size_t column = 0);

  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }

private:
  std::size_t line_;
  std::size_t column_;
};

/// A well-formed problem that violates a semantic constraint.
class ValidationError : public Error {
public:
  using Error::Error;
};

/// A model failed to produce a trace.
class SimulationError : public Error {
public:
  SimulationError(const std::string &what, double time = -1.0);

  /// Simulation time at which the failure occurred, or negative if unknown.
  double time() const { return time_; }

private:
  double time_;
};

/// An external simulator broke the line protocol.
class ProtocolError : public SimulationError {
public:
  explicit ProtocolError(const std::string &what) : SimulationError(what) {}
};

} // namespace falsify
