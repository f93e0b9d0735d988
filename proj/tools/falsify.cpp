// Command-line front end: run falsification trials, evaluate robustness of a
// stored trace, or simulate a problem's model on a given input.

#include "falsify/error.hpp"
#include "falsify/problem.hpp"
#include "falsify/robustness.hpp"
#include "falsify/trials.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>

#include <cstdio>
#include <fstream>
#include <iostream>

using namespace falsify;

namespace {

constexpr int kUsageError = 1;
constexpr int kRuntimeError = 2;

struct RunArgs {
  std::vector<std::string> problems;
  std::string solver = "alvts";
  std::size_t trials = 50;
  std::size_t max_iterations = 300;
  std::uint64_t seed = 0;
  std::string out = "results";
  std::string format = "csv";
  unsigned jobs = 1;
  unsigned control_points = 0;
};

int run(const RunArgs &args) {
  TrialOptions options;
  options.solver = parse_solver(args.solver);
  options.trials = args.trials;
  options.max_iterations = args.max_iterations;
  options.seed = args.seed;
  options.jobs = args.jobs;
  options.random_control_points = args.control_points;
  const OutputFormat format = parse_format(args.format);

  std::vector<Problem> problems;
  for (const auto &path : args.problems) {
    problems.push_back(load_problem(path));
  }
  std::vector<TrialTable> tables;
  for (const auto &problem : problems) {
    tables.push_back(run_trials(problem, options));
    const Aggregate a = tables.back().aggregate();
    fmt::print("{} {}: {}/{} falsified", problem.name, args.solver, a.successes, a.trials);
    if (a.mean_iterations) {
      fmt::print(", mean {:.2f} iterations", *a.mean_iterations);
    }
    if (a.sd_iterations) {
      fmt::print(", sd {:.2f}", *a.sd_iterations);
    }
    if (a.errors > 0) {
      fmt::print(", {} trials failed with errors", a.errors);
    }
    fmt::print("\n");
  }
  fmt::print("wrote {}\n", emit_results(tables, format, args.out));
  return 0;
}

int robustness(const std::string &problem_path, const std::string &trace_path) {
  const Problem problem = load_problem(problem_path);
  std::vector<std::string> names;
  const Trace y = trace_from_csv(read_file(trace_path), &names);
  if (names != problem.outputs) {
    throw ValidationError(fmt::format("{}: columns ({}) do not match the model outputs ({})", trace_path,
                                      fmt::join(names, " "), fmt::join(problem.outputs, " ")));
  }
  const RobustnessInterval bounds = rho_bounds(problem.requirement, y);
  if (y.length() + 1e-9 * y.step() >= horizon(problem.requirement)) {
    fmt::print("rho {}\n", rho(problem.requirement, y));
  } else {
    fmt::print("rho undetermined (trace shorter than the requirement horizon)\n");
  }
  fmt::print("lower {}\nupper {}\n", bounds.lo, bounds.hi);
  return 0;
}

int simulate(const std::string &problem_path, const std::string &input_path, const std::string &out) {
  const Problem problem = load_problem(problem_path);
  const auto model = problem.make_model();
  const InputSignal u = load_input(input_path, model->input_dimension());
  const std::string csv = trace_to_csv(model->simulate(u, problem.step), model->output_names());
  if (out.empty() || out == "-") {
    std::fwrite(csv.data(), 1, csv.size(), stdout);
    return 0;
  }
  std::ofstream file(out, std::ios::binary);
  file << csv;
  file.close();
  if (!file) {
    throw Error(fmt::format("cannot write '{}'", out));
  }
  return 0;
}

} // namespace

int main(int argc, char **argv) {
  CLI::App app{"Falsification of hybrid systems against STL requirements"};
  app.require_subcommand(1);

  RunArgs run_args;
  auto *run_cmd = app.add_subcommand("run", "Run repeated falsification trials");
  run_cmd->add_option("problems", run_args.problems, "Problem files")->required()->check(CLI::ExistingFile);
  run_cmd->add_option("--solver", run_args.solver, "alvts or random")->check(CLI::IsMember({"alvts", "random"}));
  run_cmd->add_option("--trials", run_args.trials, "Trials per problem")->check(CLI::PositiveNumber);
  run_cmd->add_option("--max-iters", run_args.max_iterations, "Simulation budget per trial")
      ->check(CLI::PositiveNumber);
  run_cmd->add_option("--seed", run_args.seed, "Base seed; trial i uses seed xor i");
  run_cmd->add_option("--out", run_args.out, "Output directory");
  run_cmd->add_option("--format", run_args.format, "csv or plot")->check(CLI::IsMember({"csv", "plot"}));
  run_cmd->add_option("--jobs", run_args.jobs, "Worker threads, 0 for all cores");
  run_cmd->add_option("--control-points", run_args.control_points, "Segments per random-search sample");

  std::string problem_path;
  std::string trace_path;
  auto *rob_cmd = app.add_subcommand("robustness", "Robustness of a trace CSV");
  rob_cmd->add_option("problem", problem_path)->required()->check(CLI::ExistingFile);
  rob_cmd->add_option("trace", trace_path)->required()->check(CLI::ExistingFile);

  std::string input_path;
  std::string out_path;
  auto *sim_cmd = app.add_subcommand("simulate", "Simulate the problem's model on an input");
  sim_cmd->add_option("problem", problem_path)->required()->check(CLI::ExistingFile);
  sim_cmd->add_option("input", input_path)->required()->check(CLI::ExistingFile);
  sim_cmd->add_option("--out", out_path, "Trace CSV, stdout by default");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kUsageError;
  }

  try {
    if (*run_cmd) {
      return run(run_args);
    }
    if (*rob_cmd) {
      return robustness(problem_path, trace_path);
    }
    return simulate(problem_path, input_path, out_path);
  } catch (const ParseError &e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return kUsageError;
  } catch (const ValidationError &e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return kUsageError;
  } catch (const std::exception &e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return kRuntimeError;
  }
}
