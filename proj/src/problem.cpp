#include "falsify/problem.hpp"

#include "falsify/error.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>

namespace falsify {

namespace {

double number_of(const SExpr &e, const char *what) {
  const auto v = e.number();
  if (!v) {
    e.fail(fmt::format("expected a number for {}, got '{}'", what, to_string(e)));
  }
  return *v;
}

std::string name_of(const SExpr &e, const char *what) {
  if (!e.is_atom() || e.number()) {
    e.fail(fmt::format("expected a name for {}, got '{}'", what, to_string(e)));
  }
  return e.text;
}

void expect_size(const SExpr &e, std::size_t n) {
  if (e.items.size() != n) {
    e.fail(fmt::format("'{}' takes {} argument{}", e.head(), n - 1, n == 2 ? "" : "s"));
  }
}

InputDomain parse_range(const SExpr &e, std::size_t first) {
  InputDomain d;
  d.name = name_of(e.items[first], "an input name");
  d.lo = number_of(e.items[first + 1], "a lower bound");
  d.hi = number_of(e.items[first + 2], "an upper bound");
  if (!(d.lo <= d.hi)) {
    e.fail(fmt::format("empty range [{}, {}] for '{}'", d.lo, d.hi, d.name));
  }
  return d;
}

ModelSpec parse_model(const SExpr &e, const std::string &base_dir) {
  expect_size(e, 2);
  const SExpr &body = e.items[1];
  if (!body.is_list() || body.items.empty()) {
    body.fail("expected (builtin NAME) or (external ...)");
  }
  ModelSpec spec;
  if (body.head() == "builtin") {
    expect_size(body, 2);
    spec.kind = ModelSpec::Kind::Builtin;
    spec.name = name_of(body.items[1], "a built-in model");
    return spec;
  }
  if (body.head() != "external") {
    body.fail(fmt::format("unknown model kind '{}'", to_string(body.items[0])));
  }
  spec.kind = ModelSpec::Kind::External;
  for (std::size_t i = 1; i < body.items.size(); ++i) {
    const SExpr &clause = body.items[i];
    if (!clause.is_list() || clause.items.size() < 2) {
      clause.fail("expected (command ...), (outputs ...) or (discrete ...)");
    }
    std::vector<std::string> words;
    for (std::size_t j = 1; j < clause.items.size(); ++j) {
      const SExpr &w = clause.items[j];
      if (w.is_list()) {
        w.fail("expected a word");
      }
      words.push_back(w.text);
    }
    if (clause.head() == "command") {
      spec.command = std::move(words);
    } else if (clause.head() == "outputs") {
      spec.outputs = std::move(words);
    } else if (clause.head() == "discrete") {
      spec.discrete = std::move(words);
    } else {
      clause.fail(fmt::format("unknown external model clause '{}'", clause.head()));
    }
  }
  if (spec.command.empty()) {
    body.fail("external model needs (command ...)");
  }
  if (spec.outputs.empty()) {
    body.fail("external model needs (outputs ...)");
  }
  for (const auto &d : spec.discrete) {
    if (std::find(spec.outputs.begin(), spec.outputs.end(), d) == spec.outputs.end()) {
      body.fail(fmt::format("discrete output '{}' is not an output", d));
    }
  }
  std::string &program = spec.command.front();
  if (program.find('/') != std::string::npos && std::filesystem::path(program).is_relative()) {
    program = (std::filesystem::path(base_dir) / program).lexically_normal().string();
  }
  return spec;
}

} // namespace

std::unique_ptr<SystemModel> Problem::make_model() const {
  if (model.kind == ModelSpec::Kind::Builtin) {
    std::vector<std::string> names;
    for (const auto &p : parameters) {
      names.push_back(p.name);
    }
    return make_builtin_model(model.name, names);
  }
  return std::make_unique<ExternalModel>(model.command, input_names(), model.outputs, model.discrete);
}

std::vector<std::string> Problem::input_names() const {
  std::vector<std::string> names;
  for (const auto &d : space.domains()) {
    names.push_back(d.name);
  }
  for (const auto &p : parameters) {
    names.push_back(p.name);
  }
  return names;
}

SearchConfig Problem::search_config(Solver solver, std::size_t max_iterations, std::uint64_t seed) const {
  SearchConfig config;
  config.solver = solver;
  config.max_iterations = max_iterations;
  config.seed = seed;
  config.step = step;
  config.parameters = parameters;
  return config;
}

Problem parse_problem(const SExpr &expr, const std::string &name, const std::string &base_dir) {
  if (!expr.is_list() || expr.head() != "problem") {
    expr.fail("expected (problem ...)");
  }
  std::optional<ModelSpec> model;
  const SExpr *input_space = nullptr;
  const SExpr *requirement = nullptr;
  std::vector<InputDomain> parameters;
  std::optional<double> step;
  std::set<std::string> seen;

  for (std::size_t i = 1; i < expr.items.size(); ++i) {
    const SExpr &clause = expr.items[i];
    if (!clause.is_list() || clause.items.empty() || !clause.items[0].is_atom()) {
      clause.fail("expected a problem clause");
    }
    const std::string head(clause.head());
    if (!seen.insert(head).second) {
      clause.fail(fmt::format("duplicate '{}' clause", head));
    }
    if (head == "model") {
      model = parse_model(clause, base_dir);
    } else if (head == "input-space") {
      input_space = &clause;
    } else if (head == "params") {
      for (std::size_t j = 1; j < clause.items.size(); ++j) {
        const SExpr &p = clause.items[j];
        if (!p.is_list() || p.items.size() != 3) {
          p.fail("expected (NAME LO HI)");
        }
        parameters.push_back(parse_range(p, 0));
      }
    } else if (head == "step") {
      expect_size(clause, 2);
      step = number_of(clause.items[1], "the step");
      if (!(*step > 0.0)) {
        clause.items[1].fail("step must be positive");
      }
    } else if (head == "requirement") {
      expect_size(clause, 2);
      requirement = &clause.items[1];
    } else {
      clause.fail(fmt::format("unknown problem clause '{}'", head));
    }
  }
  if (!model) {
    expr.fail("problem has no (model ...)");
  }
  if (input_space == nullptr) {
    expr.fail("problem has no (input-space ...)");
  }
  if (requirement == nullptr) {
    expr.fail("problem has no (requirement ...)");
  }

  std::optional<double> time_horizon;
  std::vector<unsigned> levels;
  std::vector<InputDomain> domains;
  for (std::size_t i = 1; i < input_space->items.size(); ++i) {
    const SExpr &clause = input_space->items[i];
    if (!clause.is_list() || clause.items.empty()) {
      clause.fail("expected (horizon T), (levels ...) or (dim NAME LO HI)");
    }
    if (clause.head() == "horizon") {
      expect_size(clause, 2);
      time_horizon = number_of(clause.items[1], "the horizon");
    } else if (clause.head() == "levels") {
      if (clause.items.size() < 2) {
        clause.fail("need at least one level");
      }
      for (std::size_t j = 1; j < clause.items.size(); ++j) {
        const double k = number_of(clause.items[j], "a control point count");
        if (k < 1 || k != std::floor(k) || k > 1e9) {
          clause.items[j].fail("control point counts are positive integers");
        }
        levels.push_back(static_cast<unsigned>(k));
      }
    } else if (clause.head() == "dim") {
      expect_size(clause, 4);
      domains.push_back(parse_range(clause, 1));
    } else {
      clause.fail(fmt::format("unknown input-space clause '{}'", clause.head()));
    }
  }
  if (!time_horizon) {
    input_space->fail("input-space has no (horizon T)");
  }
  if (levels.empty()) {
    input_space->fail("input-space has no (levels ...)");
  }
  if (domains.empty()) {
    input_space->fail("input-space has no (dim ...)");
  }
  SegmentSpace space(domains, levels, *time_horizon);

  std::vector<std::string> names;
  for (const auto &d : domains) {
    names.push_back(d.name);
  }
  for (const auto &p : parameters) {
    names.push_back(p.name);
  }
  if (std::set<std::string>(names.begin(), names.end()).size() != names.size()) {
    throw ValidationError("input and parameter names must be distinct");
  }

  std::vector<std::string> outputs;
  std::vector<std::string> discrete;
  if (model->kind == ModelSpec::Kind::Builtin) {
    const auto probe = make_builtin_model(model->name, std::vector<std::string>(names.begin() + domains.size(), names.end()));
    if (probe->input_names() != names) {
      throw ValidationError(fmt::format("model '{}' takes inputs ({}), problem declares ({})", model->name,
                                        fmt::join(probe->input_names(), " "), fmt::join(names, " ")));
    }
    outputs = probe->output_names();
    discrete = probe->discrete_outputs();
  } else {
    outputs = model->outputs;
    discrete = model->discrete;
  }

  Formula phi = parse_formula(*requirement, outputs, discrete);
  const double h = horizon(phi);
  if (h > *time_horizon * (1.0 + 1e-12)) {
    throw ValidationError(
        fmt::format("requirement horizon {} exceeds the input horizon {}", h, *time_horizon));
  }
  return Problem{name,
                 std::move(*model),
                 std::move(space),
                 std::move(parameters),
                 step.value_or(*time_horizon / 300.0),
                 std::move(phi),
                 std::move(outputs),
                 std::move(discrete)};
}

Problem parse_problem(std::string_view text, const std::string &name, const std::string &base_dir) {
  return parse_problem(parse_sexpr(text), name, base_dir);
}

std::string read_file(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(fmt::format("cannot open '{}'", path));
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

Problem load_problem(const std::string &path) {
  const std::string text = read_file(path);
  const std::filesystem::path p(path);
  try {
    return parse_problem(text, p.stem().string(), p.parent_path().empty() ? "." : p.parent_path().string());
  } catch (const ParseError &e) {
    throw ParseError(fmt::format("{}:{}", path, e.what()));
  } catch (const ValidationError &e) {
    throw ValidationError(fmt::format("{}: {}", path, e.what()));
  }
}

InputSignal parse_input(std::string_view text, std::size_t dimension) {
  const SExpr expr = parse_sexpr(text);
  if (!expr.is_list() || expr.head() != "input") {
    expr.fail("expected (input (segment DURATION V...)...)");
  }
  InputSignal u(dimension);
  for (std::size_t i = 1; i < expr.items.size(); ++i) {
    const SExpr &s = expr.items[i];
    if (!s.is_list() || s.head() != "segment") {
      s.fail("expected (segment DURATION V...)");
    }
    if (s.items.size() != dimension + 2) {
      s.fail(fmt::format("segment needs a duration and {} values", dimension));
    }
    Segment segment;
    segment.duration = number_of(s.items[1], "a duration");
    if (!(segment.duration > 0.0)) {
      s.items[1].fail("segment duration must be positive");
    }
    for (std::size_t j = 2; j < s.items.size(); ++j) {
      segment.values.push_back(number_of(s.items[j], "a value"));
    }
    u.append(std::move(segment));
  }
  if (u.empty()) {
    expr.fail("input has no segments");
  }
  return u;
}

InputSignal load_input(const std::string &path, std::size_t dimension) {
  try {
    return parse_input(read_file(path), dimension);
  } catch (const ParseError &e) {
    throw ParseError(fmt::format("{}:{}", path, e.what()));
  }
}

} // namespace falsify
