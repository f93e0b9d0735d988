#pragma once

#include "falsify/problem.hpp"
#include "falsify/search.hpp"

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace falsify {

struct TrialRow {
  std::size_t trial = 0;
  std::uint64_t seed = 0;
  Status status = Status::BudgetReached;
  /// Set when the trial was aborted by an error; status is then meaningless.
  bool failed = false;
  std::string error;
  std::size_t iterations = 0;
  /// Simulate calls observed at the model boundary.
  std::size_t simulations = 0;
  double robustness = 0.0;
  double best_robustness = 0.0;
  /// Not part of the CSV, which must be reproducible.
  double wall_seconds = 0.0;
  std::optional<InputSignal> witness;

  bool success() const { return !failed && status == Status::Falsified; }
};

struct Aggregate {
  std::size_t trials = 0;
  std::size_t successes = 0;
  std::size_t errors = 0;
  /// Over successful trials only; absent when there are none.
  std::optional<double> mean_iterations;
  /// Sample standard deviation; absent with fewer than two successes.
  std::optional<double> sd_iterations;

  bool tainted() const { return errors > 0; }
  bool operator==(const Aggregate &) const = default;
};

Aggregate aggregate(std::span<const TrialRow> rows);

struct TrialTable {
  std::string problem;
  Solver solver = Solver::Alvts;
  std::vector<TrialRow> rows;

  Aggregate aggregate() const { return falsify::aggregate(rows); }
};

/// Geometric mean of positive values; the suite summary of per-problem means.
double geometric_mean(std::span<const double> values);

struct TrialOptions {
  Solver solver = Solver::Alvts;
  std::size_t trials = 50;
  std::size_t max_iterations = 300;
  std::uint64_t seed = 0;
  /// Worker threads; zero picks the hardware concurrency.
  unsigned jobs = 1;
  /// Control points per random-search sample; zero keeps the default.
  unsigned random_control_points = 0;
};

using SearchFunction = std::function<FalsificationOutcome(SystemModel &, const Problem &, const SearchConfig &)>;

/// Runs independent trials with seeds seed ^ index. Errors abort only the
/// trial they occur in. Rows come back ordered by trial index.
TrialTable run_trials(const Problem &problem, const TrialOptions &options);

/// Same, with a custom search in place of the configured solver.
TrialTable run_trials(const Problem &problem, const TrialOptions &options, const SearchFunction &search);

enum class OutputFormat { Csv, Plot };
OutputFormat parse_format(const std::string &name);

/// One row per trial and a `#` footer per table, plus a suite line when
/// there are several problems.
std::string results_csv(std::span<const TrialTable> tables);

/// Rows of a results CSV; footers are ignored.
std::vector<TrialTable> parse_results_csv(const std::string &text);

/// Per (problem, solver): successful iteration counts sorted ascending.
std::vector<std::pair<std::size_t, std::size_t>> performance_series(const TrialTable &table);
std::string plot_data(std::span<const TrialTable> tables);

/// Wall-clock seconds per trial.
std::string timing_csv(std::span<const TrialTable> tables);

/// Writes results.csv or plot.csv plus timing.csv into `directory`. Returns
/// the main file's path.
std::string emit_results(std::span<const TrialTable> tables, OutputFormat format, const std::string &directory);

} // namespace falsify
