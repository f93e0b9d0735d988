#include "falsify/trials.hpp"

#include "falsify/error.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <thread>

namespace falsify {

namespace {

const char *const kHeader = "problem,solver,trial,seed,status,iterations,simulations,robustness,best_robustness,error";

std::string quote(const std::string &field) {
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') {
      out += "\"\"";
    } else if (c == '\n' || c == '\r') {
      out += ' ';
    } else {
      out += c;
    }
  }
  return out + "\"";
}

std::vector<std::string> split_csv(const std::string &line) {
  std::vector<std::string> fields(1);
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        fields.back() += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        fields.back() += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.emplace_back();
    } else {
      fields.back() += c;
    }
  }
  if (quoted) {
    throw ParseError(fmt::format("unterminated quote in '{}'", line));
  }
  return fields;
}

template <class T> T parse_integer(const std::string &text) {
  std::size_t used = 0;
  unsigned long long v = 0;
  try {
    v = std::stoull(text, &used);
  } catch (const std::exception &) {
    used = 0;
  }
  if (used != text.size() || text.empty()) {
    throw ParseError(fmt::format("bad integer '{}'", text));
  }
  return static_cast<T>(v);
}

double parse_real(const std::string &text) {
  char *end = nullptr;
  const double v = std::strtod(text.c_str(), &end);
  if (text.empty() || *end != '\0') {
    throw ParseError(fmt::format("bad number '{}'", text));
  }
  return v;
}

std::string optional_number(const std::optional<double> &v) { return v ? fmt::format("{}", *v) : "none"; }

void write_file(const std::filesystem::path &path, const std::string &text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  out.close();
  if (!out) {
    throw Error(fmt::format("cannot write '{}'", path.string()));
  }
}

} // namespace

Aggregate aggregate(std::span<const TrialRow> rows) {
  Aggregate a;
  a.trials = rows.size();
  double sum = 0.0;
  for (const auto &row : rows) {
    if (row.failed) {
      ++a.errors;
    } else if (row.success()) {
      ++a.successes;
      sum += static_cast<double>(row.iterations);
    }
  }
  if (a.successes > 0) {
    const double mean = sum / static_cast<double>(a.successes);
    a.mean_iterations = mean;
    if (a.successes > 1) {
      double squares = 0.0;
      for (const auto &row : rows) {
        if (row.success()) {
          const double d = static_cast<double>(row.iterations) - mean;
          squares += d * d;
        }
      }
      a.sd_iterations = std::sqrt(squares / static_cast<double>(a.successes - 1));
    }
  }
  return a;
}

double geometric_mean(std::span<const double> values) {
  if (values.empty()) {
    throw Error("geometric mean of no values");
  }
  double log_sum = 0.0;
  for (double v : values) {
    if (!(v > 0.0)) {
      throw Error(fmt::format("geometric mean needs positive values, got {}", v));
    }
    log_sum += std::log(v);
  }
  return std::exp(log_sum / static_cast<double>(values.size()));
}

TrialTable run_trials(const Problem &problem, const TrialOptions &options) {
  return run_trials(problem, options, [&options](SystemModel &model, const Problem &p, const SearchConfig &config) {
    Rng rng(config.seed);
    return options.solver == Solver::Alvts ? alvts(model, p.requirement, p.space, config, rng)
                                           : random_search(model, p.requirement, p.space, config, rng);
  });
}

TrialTable run_trials(const Problem &problem, const TrialOptions &options, const SearchFunction &search) {
  if (options.trials == 0) {
    throw ValidationError("need at least one trial");
  }
  TrialTable table;
  table.problem = problem.name;
  table.solver = options.solver;
  table.rows.resize(options.trials);

  std::atomic<std::size_t> next{0};
  const auto worker = [&] {
    std::unique_ptr<SystemModel> model;
    for (std::size_t i = next++; i < options.trials; i = next++) {
      TrialRow &row = table.rows[i];
      row.trial = i;
      row.seed = options.seed ^ static_cast<std::uint64_t>(i);
      SearchConfig config = problem.search_config(options.solver, options.max_iterations, row.seed);
      if (options.random_control_points > 0) {
        config.random_control_points = options.random_control_points;
      }
      const auto start = std::chrono::steady_clock::now();
      std::unique_ptr<CountingModel> counter;
      try {
        if (!model) {
          model = problem.make_model();
        }
        counter = std::make_unique<CountingModel>(*model);
        FalsificationOutcome outcome = search(*counter, problem, config);
        row.status = outcome.status;
        row.iterations = outcome.iterations;
        row.robustness = outcome.robustness;
        row.best_robustness = outcome.best_robustness;
        row.witness = std::move(outcome.witness);
      } catch (const std::exception &e) {
        row.failed = true;
        row.error = e.what();
        row.robustness = kInfinity;
        row.best_robustness = kInfinity;
        model.reset();
      }
      row.simulations = counter ? counter->count() : 0;
      if (row.failed) {
        row.iterations = row.simulations;
      }
      row.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    }
  };

  unsigned jobs = options.jobs == 0 ? std::max(1u, std::thread::hardware_concurrency()) : options.jobs;
  jobs = static_cast<unsigned>(std::min<std::size_t>(jobs, options.trials));
  if (jobs <= 1) {
    worker();
  } else {
    std::vector<std::thread> threads;
    for (unsigned j = 0; j < jobs; ++j) {
      threads.emplace_back(worker);
    }
    for (auto &t : threads) {
      t.join();
    }
  }
  return table;
}

OutputFormat parse_format(const std::string &name) {
  if (name == "csv") {
    return OutputFormat::Csv;
  }
  if (name == "plot") {
    return OutputFormat::Plot;
  }
  throw ValidationError(fmt::format("unknown format '{}' (expected csv or plot)", name));
}

std::string results_csv(std::span<const TrialTable> tables) {
  std::string out = kHeader;
  out += '\n';
  for (const auto &table : tables) {
    for (const auto &row : table.rows) {
      out += fmt::format("{},{},{},{},{},{},{},{},{},{}\n", table.problem, to_string(table.solver), row.trial, row.seed,
                         row.failed ? "error" : to_string(row.status), row.iterations, row.simulations, row.robustness,
                         row.best_robustness, quote(row.error));
    }
  }
  std::map<std::string, std::vector<double>> means;
  std::map<std::string, bool> complete;
  for (const auto &table : tables) {
    const Aggregate a = table.aggregate();
    out += fmt::format("# {} {}: trials={} successes={} errors={} mean={} sd={} tainted={}\n", table.problem,
                       to_string(table.solver), a.trials, a.successes, a.errors, optional_number(a.mean_iterations),
                       optional_number(a.sd_iterations), a.tainted() ? "yes" : "no");
    const std::string solver = to_string(table.solver);
    complete.emplace(solver, true);
    if (a.mean_iterations) {
      means[solver].push_back(*a.mean_iterations);
    } else {
      complete[solver] = false;
    }
  }
  if (tables.size() > 1) {
    for (const auto &[solver, ok] : complete) {
      const auto it = means.find(solver);
      const std::optional<double> g =
          ok && it != means.end() ? std::optional<double>(geometric_mean(it->second)) : std::nullopt;
      out += fmt::format("# suite {}: geometric_mean={}\n", solver, optional_number(g));
    }
  }
  return out;
}

std::vector<TrialTable> parse_results_csv(const std::string &text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != kHeader) {
    throw ParseError("results CSV has an unexpected header");
  }
  std::vector<TrialTable> tables;
  std::size_t line_number = 1;
  while (std::getline(in, line)) {
    ++line_number;
    if (line.empty() || line[0] == '#') {
      continue;
    }
    try {
      const auto f = split_csv(line);
      if (f.size() != 10) {
        throw ParseError(fmt::format("expected 10 fields, got {}", f.size()));
      }
      const Solver solver = parse_solver(f[1]);
      if (tables.empty() || tables.back().problem != f[0] || tables.back().solver != solver) {
        tables.push_back(TrialTable{f[0], solver, {}});
      }
      TrialRow row;
      row.trial = parse_integer<std::size_t>(f[2]);
      row.seed = parse_integer<std::uint64_t>(f[3]);
      if (f[4] == "error") {
        row.failed = true;
      } else if (f[4] == "falsified") {
        row.status = Status::Falsified;
      } else if (f[4] == "exhausted") {
        row.status = Status::Exhausted;
      } else if (f[4] == "budget-reached") {
        row.status = Status::BudgetReached;
      } else {
        throw ParseError(fmt::format("unknown status '{}'", f[4]));
      }
      row.iterations = parse_integer<std::size_t>(f[5]);
      row.simulations = parse_integer<std::size_t>(f[6]);
      row.robustness = parse_real(f[7]);
      row.best_robustness = parse_real(f[8]);
      row.error = f[9];
      tables.back().rows.push_back(std::move(row));
    } catch (const Error &e) {
      throw ParseError(fmt::format("results CSV line {}: {}", line_number, e.what()));
    }
  }
  return tables;
}

std::vector<std::pair<std::size_t, std::size_t>> performance_series(const TrialTable &table) {
  std::vector<std::size_t> iterations;
  for (const auto &row : table.rows) {
    if (row.success()) {
      iterations.push_back(row.iterations);
    }
  }
  std::sort(iterations.begin(), iterations.end());
  std::vector<std::pair<std::size_t, std::size_t>> series;
  for (std::size_t i = 0; i < iterations.size(); ++i) {
    series.emplace_back(i + 1, iterations[i]);
  }
  return series;
}

std::string plot_data(std::span<const TrialTable> tables) {
  std::string out = "problem,solver,rank,iterations\n";
  for (const auto &table : tables) {
    for (const auto &[rank, iterations] : performance_series(table)) {
      out += fmt::format("{},{},{},{}\n", table.problem, to_string(table.solver), rank, iterations);
    }
  }
  return out;
}

std::string timing_csv(std::span<const TrialTable> tables) {
  std::string out = "problem,solver,trial,wall_seconds\n";
  for (const auto &table : tables) {
    for (const auto &row : table.rows) {
      out += fmt::format("{},{},{},{}\n", table.problem, to_string(table.solver), row.trial, row.wall_seconds);
    }
  }
  return out;
}

std::string emit_results(std::span<const TrialTable> tables, OutputFormat format, const std::string &directory) {
  if (tables.empty()) {
    throw Error("no results to emit");
  }
  const std::filesystem::path dir(directory);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) {
    throw Error(fmt::format("cannot create '{}': {}", dir.string(), ec.message()));
  }
  const auto main = dir / (format == OutputFormat::Csv ? "results.csv" : "plot.csv");
  write_file(main, format == OutputFormat::Csv ? results_csv(tables) : plot_data(tables));
  write_file(dir / "timing.csv", timing_csv(tables));
  return main.string();
}

} // namespace falsify
