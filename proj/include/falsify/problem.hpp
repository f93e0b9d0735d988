#pragma once

#include "falsify/inputspace.hpp"
#include "falsify/models.hpp"
#include "falsify/search.hpp"
#include "falsify/sexpr.hpp"
#include "falsify/stl.hpp"

#include <memory>
#include <string>
#include <string_view>
#include <vector>

namespace falsify {

struct ModelSpec {
  enum class Kind { Builtin, External };

  Kind kind = Kind::Builtin;
  /// Built-in model name.
  std::string name;
  /// External simulator argv.
  std::vector<std::string> command;
  /// Declared outputs of an external model.
  std::vector<std::string> outputs;
  std::vector<std::string> discrete;
};

/// A validated falsification problem.
struct Problem {
  std::string name;
  ModelSpec model;
  SegmentSpace space;
  /// Constant inputs appended after the signal dimensions.
  std::vector<InputDomain> parameters;
  double step = 0.0;
  Formula requirement;
  std::vector<std::string> outputs;
  std::vector<std::string> discrete;

  /// Fresh model instance; each worker owns one.
  std::unique_ptr<SystemModel> make_model() const;

  /// Names of all model inputs: signal dimensions, then parameters.
  std::vector<std::string> input_names() const;

  /// Search settings for this problem with the run-specific knobs filled in.
  SearchConfig search_config(Solver solver, std::size_t max_iterations, std::uint64_t seed) const;
};

/// Grammar:
///   (problem
///     (model (builtin NAME) | (external (command PROG ARG...) (outputs Y...) (discrete Y...)?))
///     (input-space (horizon T) (levels K0 K1 ...) (dim NAME LO HI)...)
///     (params (NAME LO HI)...)?
///     (step DELTA)?
///     (requirement PHI))
/// A relative PROG containing a slash is resolved against `base_dir`. The
/// step defaults to T / 300.
Problem parse_problem(const SExpr &expr, const std::string &name = "problem", const std::string &base_dir = ".");
Problem parse_problem(std::string_view text, const std::string &name = "problem", const std::string &base_dir = ".");

/// Reads and validates a problem file; the problem takes the file's stem
/// as its name.
Problem load_problem(const std::string &path);

/// Reads `(input (segment DURATION V...)...)` for a problem's model.
InputSignal parse_input(std::string_view text, std::size_t dimension);
InputSignal load_input(const std::string &path, std::size_t dimension);

std::string read_file(const std::string &path);

} // namespace falsify
