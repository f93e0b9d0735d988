#include "falsify/error.hpp"

#include <fmt/format.h>

namespace falsify {

namespace {

std::string with_position(const std::string &what, std::size_t line, std::size_t column) {
  if (line == 0) {
    return what;
  }
  return fmt::format("{}:{}: {}", line, column, what);
}

} // namespace

ParseError::ParseError(const std::string &what, std::size_t line, std::size_t column)
    : Error(with_position(what, line, column)), line_(line), column_(column) {}

SimulationError::SimulationError(const std::string &what, double time)
    : Error(time >= 0.0 ? fmt::format("{} (at t = {})", what, time) : what), time_(time) {}

} // namespace falsify
