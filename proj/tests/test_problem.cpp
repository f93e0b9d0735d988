#include "falsify/error.hpp"
#include "falsify/problem.hpp"

#include <gtest/gtest.h>

#include <string>

using namespace falsify;

namespace {

std::string problem_text(const std::string &requirement, const std::string &extra = "",
                         const std::string &space = "(horizon 30) (levels 2 2 3 3 3 4) (dim throttle 0 100) (dim brake 0 100)") {
  return "(problem (model (builtin transmission)) (input-space " + space + ") " + extra + " (requirement " +
         requirement + "))";
}

std::string problems(const std::string &file) { return std::string(PROBLEMS_DIR) + "/" + file; }

} // namespace

TEST(LoadProblem, At1) {
  const Problem p = load_problem(problems("at1.sx"));
  EXPECT_EQ(p.name, "at1");
  EXPECT_EQ(p.space.time_horizon(), 30.0);
  EXPECT_EQ(p.space.dimension(), 2u);
  EXPECT_EQ(p.space.control_points(), (std::vector<unsigned>{2, 2, 3, 3, 3, 4}));
  EXPECT_EQ(p.space.max_level(), 5u);
  EXPECT_EQ(p.step, 0.1);
  EXPECT_EQ(p.outputs, (std::vector<std::string>{"v", "omega", "g"}));
  EXPECT_EQ(p.discrete, std::vector<std::string>{"g"});
  EXPECT_EQ(p.requirement, parse_formula("(always (0 30) (< v 45))", p.outputs));
  EXPECT_EQ(p.make_model()->input_names(), (std::vector<std::string>{"throttle", "brake"}));
}

TEST(LoadProblem, At2UsesDiscreteEquality) {
  const Problem p = load_problem(problems("at2.sx"));
  EXPECT_EQ(p.requirement, parse_formula("(always (0 30) (implies (= g 4) (> v 50)))", p.outputs, {"g"}));
}

TEST(LoadProblem, ThermostatParameters) {
  const Problem p = load_problem(problems("thermostat.sx"));
  ASSERT_EQ(p.parameters.size(), 1u);
  EXPECT_EQ(p.parameters[0].name, "x0");
  EXPECT_EQ(p.parameters[0].lo, 18.0);
  EXPECT_EQ(p.input_names(), (std::vector<std::string>{"power", "x0"}));
  const SearchConfig config = p.search_config(Solver::Random, 77, 9);
  EXPECT_EQ(config.max_iterations, 77u);
  EXPECT_EQ(config.seed, 9u);
  EXPECT_EQ(config.solver, Solver::Random);
  EXPECT_EQ(config.step, 0.1);
  EXPECT_EQ(config.parameters.size(), 1u);
}

TEST(LoadProblem, ExternalAfcStyleAccepted) {
  const Problem p = load_problem(problems("afc27.sx"));
  EXPECT_EQ(p.model.kind, ModelSpec::Kind::External);
  EXPECT_EQ(p.model.command, std::vector<std::string>{std::string(PROBLEMS_DIR) + "/afc_simulator"});
  EXPECT_EQ(p.space.control_points(), (std::vector<unsigned>(5, 10)));
  EXPECT_EQ(p.space.time_horizon(), 55.0);
  EXPECT_DOUBLE_EQ(horizon(p.requirement), 55.0);
  EXPECT_EQ(p.outputs, (std::vector<std::string>{"theta", "mu"}));
}

TEST(ParseProblem, DefaultStep) {
  const Problem p = parse_problem(problem_text("(< v 45)"));
  EXPECT_DOUBLE_EQ(p.step, 0.1);
  EXPECT_EQ(p.name, "problem");
}

TEST(ParseProblem, RequirementLongerThanHorizon) {
  EXPECT_THROW(parse_problem(problem_text("(always (0 55) (< v 45))")), ValidationError);
  EXPECT_NO_THROW(parse_problem(problem_text("(always (0 30) (< v 45))")));
}

TEST(ParseProblem, UnknownOutputRejected) {
  EXPECT_THROW(parse_problem(problem_text("(< speed 45)")), ParseError);
}

TEST(ParseProblem, InputNamesMustMatchBuiltin) {
  EXPECT_THROW(parse_problem(problem_text("(< v 45)", "", "(horizon 30) (levels 2) (dim throttle 0 100)")),
               ValidationError);
  EXPECT_THROW(parse_problem(problem_text("(< v 45)", "", "(horizon 30) (levels 2) (dim brake 0 100) (dim throttle 0 100)")),
               ValidationError);
  EXPECT_THROW(parse_problem(problem_text("(< v 45)", "(params (mass 1 2))")), ValidationError);
}

TEST(ParseProblem, StructuralErrors) {
  EXPECT_THROW(parse_problem("(problem)"), Error);
  EXPECT_THROW(parse_problem("(task)"), ParseError);
  EXPECT_THROW(parse_problem(problem_text("(< v 45)", "(step 0.1) (step 0.2)")), ParseError);
  EXPECT_THROW(parse_problem(problem_text("(< v 45)", "(step -1)")), Error);
  EXPECT_THROW(parse_problem(problem_text("(< v 45)", "", "(horizon 30) (levels) (dim throttle 0 100) (dim brake 0 100)")),
               Error);
  EXPECT_THROW(parse_problem(problem_text("(< v 45)", "", "(levels 2) (dim throttle 0 100) (dim brake 0 100)")), Error);
  EXPECT_THROW(parse_problem(problem_text("(< v 45)", "", "(horizon 30) (levels 2) (dim throttle 100 0) (dim brake 0 100)")),
               ParseError);
  EXPECT_THROW(parse_problem("(problem (model (builtin warp-drive)) (input-space (horizon 1) (levels 1) (dim a 0 1))"
                             " (requirement (< a 1)))"),
               ValidationError);
}

TEST(ParseProblem, ParseErrorsCarryPositions) {
  try {
    parse_problem("(problem\n  (model (builtin transmission))\n  (input-space (horizon 30) (levels 2) (dim throttle 0 100) (dim brake 0 100))\n  (requirement (< v 45)\n");
    FAIL();
  } catch (const ParseError &e) {
    EXPECT_GT(e.line(), 0u);
  }
  try {
    parse_problem(problem_text("(< v 45)", "(frobnicate 1)"));
    FAIL();
  } catch (const ParseError &e) {
    EXPECT_EQ(e.line(), 1u);
    EXPECT_GT(e.column(), 1u);
  }
}

TEST(LoadProblem, ErrorsNameTheFile) {
  EXPECT_THROW(load_problem("/nonexistent/problem.sx"), Error);
  const std::string path = ::testing::TempDir() + "broken.sx";
  {
    std::FILE *f = std::fopen(path.c_str(), "w");
    std::fputs("(problem\n  (bogus))\n", f);
    std::fclose(f);
  }
  try {
    load_problem(path);
    FAIL();
  } catch (const Error &e) {
    EXPECT_EQ(std::string(e.what()).rfind(path, 0), 0u) << e.what();
    EXPECT_NE(std::string(e.what()).find(":2:"), std::string::npos) << e.what();
  }
}

TEST(ParseInput, Segments) {
  const InputSignal u = parse_input("(input (segment 10 50 0) (segment 20 100 0.5))", 2);
  EXPECT_EQ(u, InputSignal(2, {{10.0, {50.0, 0.0}}, {20.0, {100.0, 0.5}}}));
  EXPECT_THROW(parse_input("(input (segment 10 50))", 2), Error);
  EXPECT_THROW(parse_input("(input (segment 0 50 0))", 2), Error);
  EXPECT_THROW(parse_input("(signal (segment 1 1 1))", 2), Error);
  EXPECT_THROW(parse_input("(input)", 2), Error);
}
