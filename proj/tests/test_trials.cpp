#include "falsify/error.hpp"
#include "falsify/trials.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace falsify;

namespace {

Problem at1() { return load_problem(std::string(PROBLEMS_DIR) + "/at1.sx"); }

InputSignal idle(const Problem &p) {
  return InputSignal(p.space.dimension(), {{p.space.time_horizon(), std::vector<double>(p.space.dimension(), 0.0)}});
}

// Simulates `iterations` times and reports the given status.
SearchFunction fixed(Status status, std::size_t iterations) {
  return [=](SystemModel &model, const Problem &p, const SearchConfig &) {
    FalsificationOutcome out;
    for (std::size_t i = 0; i < iterations; ++i) {
      model.simulate(idle(p), p.step);
    }
    out.status = status;
    out.iterations = iterations;
    out.robustness = status == Status::Falsified ? -1.0 : 1.0;
    out.best_robustness = out.robustness;
    return out;
  };
}

TrialRow success(std::size_t iterations) {
  TrialRow row;
  row.status = Status::Falsified;
  row.iterations = iterations;
  return row;
}

} // namespace

TEST(Trials, AlwaysFalsifyAtFirstIteration) {
  TrialOptions options;
  const TrialTable table = run_trials(at1(), options, fixed(Status::Falsified, 1));
  ASSERT_EQ(table.rows.size(), 50u);
  const Aggregate a = table.aggregate();
  EXPECT_EQ(a.trials, 50u);
  EXPECT_EQ(a.successes, 50u);
  EXPECT_EQ(a.errors, 0u);
  EXPECT_EQ(a.mean_iterations, 1.0);
  EXPECT_EQ(a.sd_iterations, 0.0);
  EXPECT_FALSE(a.tainted());
  for (std::size_t i = 0; i < 50; ++i) {
    EXPECT_EQ(table.rows[i].trial, i);
    EXPECT_EQ(table.rows[i].simulations, 1u);
  }
}

TEST(Trials, NeverFalsify) {
  TrialOptions options;
  options.trials = 20;
  const Aggregate a = run_trials(at1(), options, fixed(Status::BudgetReached, 3)).aggregate();
  EXPECT_EQ(a.successes, 0u);
  EXPECT_FALSE(a.mean_iterations);
  EXPECT_FALSE(a.sd_iterations);
  const std::string csv = results_csv(std::vector<TrialTable>{run_trials(at1(), options, fixed(Status::BudgetReached, 3))});
  EXPECT_NE(csv.find("mean=none sd=none tainted=no"), std::string::npos);
}

TEST(Aggregate, MeanAndSampleDeviation) {
  const std::vector<TrialRow> rows{success(2), success(4), success(9), TrialRow{}};
  const Aggregate a = aggregate(rows);
  EXPECT_EQ(a.trials, 4u);
  EXPECT_EQ(a.successes, 3u);
  EXPECT_DOUBLE_EQ(*a.mean_iterations, 5.0);
  EXPECT_DOUBLE_EQ(*a.sd_iterations, std::sqrt((9.0 + 1.0 + 16.0) / 2.0));
  const std::vector<TrialRow> one{success(7)};
  EXPECT_EQ(aggregate(one).mean_iterations, 7.0);
  EXPECT_FALSE(aggregate(one).sd_iterations);
}

TEST(Series, SortedByIterations) {
  TrialTable single{"p", Solver::Alvts, {success(7)}};
  EXPECT_EQ(performance_series(single), (std::vector<std::pair<std::size_t, std::size_t>>{{1, 7}}));
  TrialTable several{"p", Solver::Alvts, {success(9), TrialRow{}, success(3), success(5)}};
  EXPECT_EQ(performance_series(several), (std::vector<std::pair<std::size_t, std::size_t>>{{1, 3}, {2, 5}, {3, 9}}));
  const std::string plot = plot_data(std::vector<TrialTable>{several});
  EXPECT_EQ(plot, "problem,solver,rank,iterations\np,alvts,1,3\np,alvts,2,5\np,alvts,3,9\n");
}

TEST(Trials, ErrorsAreRecordedAndTaint) {
  TrialOptions options;
  options.trials = 10;
  const auto search = [](SystemModel &model, const Problem &p, const SearchConfig &config) {
    model.simulate(idle(p), p.step);
    if (config.seed % 3 == 0) {
      throw SimulationError("solver blew up, \"badly\"");
    }
    return fixed(Status::Falsified, 1)(model, p, config);
  };
  const TrialTable table = run_trials(at1(), options, search);
  const Aggregate a = table.aggregate();
  EXPECT_EQ(a.errors, 4u);
  EXPECT_EQ(a.successes, 6u);
  EXPECT_TRUE(a.tainted());
  for (const auto &row : table.rows) {
    if (row.failed) {
      EXPECT_FALSE(row.success());
      EXPECT_EQ(row.iterations, 1u);
      EXPECT_EQ(row.simulations, 1u);
      EXPECT_NE(row.error.find("badly"), std::string::npos);
    }
  }
  const std::string csv = results_csv(std::vector<TrialTable>{table});
  EXPECT_NE(csv.find("tainted=yes"), std::string::npos);
  EXPECT_NE(csv.find(",error,"), std::string::npos);
  const auto back = parse_results_csv(csv);
  ASSERT_EQ(back.size(), 1u);
  EXPECT_EQ(back[0].rows[0].error, table.rows[0].error);
  EXPECT_EQ(back[0].aggregate(), a);
}

TEST(Trials, SeedsAreXoredWithIndex) {
  TrialOptions options;
  options.trials = 4;
  options.seed = 0b1010;
  const TrialTable table = run_trials(at1(), options, fixed(Status::Falsified, 1));
  EXPECT_EQ(table.rows[0].seed, 0b1010u);
  EXPECT_EQ(table.rows[1].seed, 0b1011u);
  EXPECT_EQ(table.rows[2].seed, 0b1000u);
  EXPECT_EQ(table.rows[3].seed, 0b1001u);
}

TEST(Trials, RealRunsReproduceAndRoundTrip) {
  TrialOptions options;
  options.trials = 8;
  options.seed = 5;
  const Problem p = at1();
  const TrialTable first = run_trials(p, options);
  const TrialTable second = run_trials(p, options);
  const std::vector<TrialTable> tables{first};
  const std::string csv = results_csv(tables);
  EXPECT_EQ(csv, results_csv(std::vector<TrialTable>{second}));
  for (const auto &row : first.rows) {
    EXPECT_EQ(row.iterations, row.simulations);
    EXPECT_FALSE(row.failed) << row.error;
  }
  const auto back = parse_results_csv(csv);
  ASSERT_EQ(back.size(), 1u);
  EXPECT_EQ(back[0].aggregate(), first.aggregate());
  EXPECT_EQ(results_csv(back), csv);

  options.jobs = 3;
  EXPECT_EQ(results_csv(std::vector<TrialTable>{run_trials(p, options)}), csv);
}

TEST(Trials, RandomSolverCountsSimulations) {
  TrialOptions options;
  options.trials = 3;
  options.max_iterations = 20;
  options.solver = Solver::Random;
  options.random_control_points = 2;
  const TrialTable table = run_trials(at1(), options);
  EXPECT_EQ(table.solver, Solver::Random);
  for (const auto &row : table.rows) {
    EXPECT_EQ(row.iterations, row.simulations);
    EXPECT_EQ(row.status, Status::BudgetReached);
    EXPECT_EQ(row.iterations, 20u);
  }
}

TEST(GeometricMean, Values) {
  const std::vector<double> v{1.0, 4.0, 16.0};
  EXPECT_NEAR(geometric_mean(v), 4.0, 1e-12);
  const std::vector<double> bad{1.0, 0.0};
  EXPECT_THROW(geometric_mean(bad), Error);
}

TEST(ResultsCsv, SuiteLine) {
  TrialTable a{"a", Solver::Alvts, {success(2)}};
  TrialTable b{"b", Solver::Alvts, {success(8)}};
  const std::string csv = results_csv(std::vector<TrialTable>{a, b});
  EXPECT_NE(csv.find("# suite alvts: geometric_mean=4\n"), std::string::npos) << csv;
  TrialTable c{"c", Solver::Alvts, {TrialRow{}}};
  EXPECT_NE(results_csv(std::vector<TrialTable>{a, c}).find("geometric_mean=none"), std::string::npos);
  EXPECT_EQ(results_csv(std::vector<TrialTable>{a}).find("# suite"), std::string::npos);
}

TEST(ResultsCsv, RejectsGarbage) {
  EXPECT_THROW(parse_results_csv("nope\n"), ParseError);
  const std::string header = "problem,solver,trial,seed,status,iterations,simulations,robustness,best_robustness,error\n";
  EXPECT_THROW(parse_results_csv(header + "a,alvts,0,0,weird,1,1,0,0,\"\"\n"), ParseError);
  EXPECT_THROW(parse_results_csv(header + "a,alvts,0,0\n"), ParseError);
  EXPECT_TRUE(parse_results_csv(header).empty());
}

TEST(Emit, WritesFiles) {
  const std::string dir = ::testing::TempDir() + "emit-test";
  TrialTable a{"a", Solver::Alvts, {success(2)}};
  const std::vector<TrialTable> tables{a};
  const std::string main = emit_results(tables, OutputFormat::Csv, dir);
  EXPECT_EQ(std::filesystem::path(main).filename(), "results.csv");
  std::ifstream in(main);
  std::stringstream text;
  text << in.rdbuf();
  EXPECT_EQ(text.str(), results_csv(tables));
  EXPECT_TRUE(std::filesystem::exists(std::filesystem::path(dir) / "timing.csv"));
  EXPECT_EQ(std::filesystem::path(emit_results(tables, OutputFormat::Plot, dir)).filename(), "plot.csv");
  EXPECT_EQ(parse_format("plot"), OutputFormat::Plot);
  EXPECT_THROW(parse_format("xml"), ValidationError);
}
