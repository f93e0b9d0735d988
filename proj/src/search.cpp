#include "falsify/search.hpp"

#include "falsify/error.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>

namespace falsify {

namespace {

constexpr double kTimeSlack = 1e-9;
constexpr std::size_t kMaxAbandonedInARow = 100000;

double default_step(const SegmentSpace &space, double step) {
  return step > 0.0 ? step : space.time_horizon() / 300.0;
}

// Uniform choice among the explored edges that minimise a score.
template <class Score>
std::size_t pick_minimal(const std::deque<Edge> &edges, Rng &rng, Score score) {
  double best = kInfinity;
  std::vector<std::size_t> ties;
  for (std::size_t i = 0; i < edges.size(); ++i) {
    const double s = score(edges[i]);
    if (ties.empty() || s < best) {
      best = s;
      ties.assign(1, i);
    } else if (s == best) {
      ties.push_back(i);
    }
  }
  return ties[rng.below(ties.size())];
}

} // namespace

double Rng::uniform() { return static_cast<double>(bits() >> 11) * 0x1.0p-53; }

std::uint64_t Rng::below(std::uint64_t n) {
  if (n == 0) {
    throw Error("Rng::below(0)");
  }
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % n;
  std::uint64_t x = bits();
  while (x >= limit) {
    x = bits();
  }
  return x % n;
}

std::uint64_t UnexploredPool::at(std::uint64_t slot) const {
  const auto it = moved_.find(slot);
  return it == moved_.end() ? slot : it->second;
}

std::uint64_t UnexploredPool::draw(Rng &rng) {
  if (remaining_ == 0) {
    throw Error("draw from an empty pool");
  }
  const std::uint64_t slot = rng.below(remaining_);
  const std::uint64_t value = at(slot);
  const std::uint64_t last = remaining_ - 1;
  if (slot != last) {
    moved_[slot] = at(last);
  }
  moved_.erase(last);
  --remaining_;
  return value;
}

std::vector<std::uint64_t> UnexploredPool::members() const {
  std::vector<std::uint64_t> out;
  out.reserve(remaining_);
  for (std::uint64_t slot = 0; slot < remaining_; ++slot) {
    out.push_back(at(slot));
  }
  return out;
}

SearchNode::SearchNode(const SegmentSpace &space) {
  for (unsigned l = 0; l <= space.max_level(); ++l) {
    levels.push_back(LevelEdges{UnexploredPool(space.level_size(l)), {}});
  }
}

bool SearchNode::exhausted() const {
  return std::all_of(levels.begin(), levels.end(),
                     [](const LevelEdges &e) { return e.unexplored.empty() && e.explored.empty(); });
}

bool SearchNode::has_explored() const {
  return std::any_of(levels.begin(), levels.end(), [](const LevelEdges &e) { return !e.explored.empty(); });
}

double level_weight(const SearchNode &node, unsigned level, const SegmentSpace &space, double base) {
  const auto &edges = node.levels.at(level);
  const double available = static_cast<double>(edges.unexplored.remaining() + edges.explored.size());
  return available / (std::pow(base, static_cast<double>(level)) * static_cast<double>(space.level_size(level)));
}

unsigned choose_level(const SearchNode &node, const SegmentSpace &space, Rng &rng, double base) {
  std::vector<double> weights(node.levels.size());
  double total = 0.0;
  for (unsigned l = 0; l < weights.size(); ++l) {
    weights[l] = level_weight(node, l, space, base);
    total += weights[l];
  }
  if (!(total > 0.0)) {
    throw Error("no edges left at this node");
  }
  const double r = rng.uniform() * total;
  double acc = 0.0;
  unsigned last_nonzero = 0;
  for (unsigned l = 0; l < weights.size(); ++l) {
    if (weights[l] > 0.0) {
      last_nonzero = l;
      acc += weights[l];
      if (r < acc) {
        return l;
      }
    }
  }
  return last_nonzero;
}

EdgeChoice sample_edge(SearchNode &node, const SegmentSpace &space, Rng &rng, double base) {
  EdgeChoice choice;
  choice.level = choose_level(node, space, rng, base);
  LevelEdges &edges = node.levels[choice.level];

  Strategy feasible[4];
  std::size_t count = 0;
  if (!edges.unexplored.empty()) {
    feasible[count++] = Strategy::Explore;
  }
  if (!edges.explored.empty()) {
    feasible[count++] = Strategy::Revisit;
    feasible[count++] = Strategy::BestPrefix;
    feasible[count++] = Strategy::BestSuffix;
  }
  choice.strategy = feasible[rng.below(count)];

  switch (choice.strategy) {
  case Strategy::Explore:
    choice.index = edges.unexplored.draw(rng);
    return choice;
  case Strategy::Revisit:
    choice.edge = rng.below(edges.explored.size());
    break;
  case Strategy::BestPrefix:
    choice.edge = pick_minimal(edges.explored, rng, [](const Edge &e) { return e.prefix_score; });
    break;
  case Strategy::BestSuffix:
    // Without explored continuations below an edge this is the prefix score.
    choice.edge = pick_minimal(edges.explored, rng, [](const Edge &e) {
      return e.child && e.child->has_explored() ? e.suffix_score : e.prefix_score;
    });
    break;
  }
  choice.index = edges.explored[choice.edge].index;
  return choice;
}

void backpropagate(std::span<Edge *const> path, double robustness) {
  for (Edge *edge : path) {
    edge->suffix_score = std::min(edge->suffix_score, robustness);
  }
}

std::string to_string(Solver solver) { return solver == Solver::Alvts ? "alvts" : "random"; }

std::string to_string(Status status) {
  switch (status) {
  case Status::Falsified:
    return "falsified";
  case Status::Exhausted:
    return "exhausted";
  case Status::BudgetReached:
    return "budget-reached";
  }
  return "?";
}

Solver parse_solver(const std::string &name) {
  if (name == "alvts") {
    return Solver::Alvts;
  }
  if (name == "random") {
    return Solver::Random;
  }
  throw ValidationError(fmt::format("unknown solver '{}' (expected alvts or random)", name));
}

AlvtsSearch::AlvtsSearch(SystemModel &model, Formula requirement, SegmentSpace space, SearchConfig config)
    : model_(model), requirement_(std::move(requirement)), space_(std::move(space)),
      root_space_(space_.with_extra_dimensions(config.parameters)), config_(std::move(config)),
      step_(default_step(space_, config_.step)), root_(std::make_unique<SearchNode>(root_space_)) {
  if (horizon(requirement_) > space_.time_horizon() * (1.0 + kTimeSlack)) {
    throw ValidationError(fmt::format("requirement horizon {} exceeds the input horizon {}", horizon(requirement_),
                                      space_.time_horizon()));
  }
  if (model_.input_dimension() != root_space_.dimension()) {
    throw ValidationError(fmt::format("model takes {} inputs, search space provides {}", model_.input_dimension(),
                                      root_space_.dimension()));
  }
  if (config_.max_iterations == 0) {
    throw ValidationError("max_iterations must be at least 1");
  }
}

void AlvtsSearch::close_upward(std::span<SearchNode *const> nodes) {
  for (auto it = nodes.rbegin(); it != nodes.rend(); ++it) {
    SearchNode &node = **it;
    const bool all_closed = std::all_of(node.levels.begin(), node.levels.end(), [](const LevelEdges &e) {
      return e.unexplored.empty() &&
             std::all_of(e.explored.begin(), e.explored.end(), [](const Edge &edge) { return edge.child->closed; });
    });
    if (!all_closed) {
      return;
    }
    node.closed = true;
  }
}

FalsificationOutcome AlvtsSearch::run(Rng &rng) {
  struct Pending {
    SearchNode *parent;
    unsigned level;
    std::uint64_t index;
    std::unique_ptr<SearchNode> child;
    double end;
  };

  const double horizon_time = space_.time_horizon();
  const double slack = kTimeSlack * horizon_time;
  const std::size_t signal_dims = space_.dimension();
  const std::size_t total_dims = root_space_.dimension();

  FalsificationOutcome outcome;
  std::size_t abandoned_in_a_row = 0;

  while (outcome.iterations < config_.max_iterations) {
    if (root_->closed || abandoned_in_a_row >= kMaxAbandonedInARow) {
      outcome.status = Status::Exhausted;
      outcome.robustness = outcome.best_robustness;
      return outcome;
    }

    std::vector<SearchNode *> visited{root_.get()};
    std::vector<Edge *> path;
    std::vector<Pending> pending;
    std::vector<Segment> segments;
    std::vector<double> parameters;
    SearchNode *node = root_.get();
    double t = 0.0;
    bool abandoned = false;

    while (t < horizon_time - slack) {
      if (node->exhausted()) {
        node->closed = true;
        abandoned = true;
        break;
      }
      const bool at_root = segments.empty();
      const SegmentSpace &level_space = at_root ? root_space_ : space_;
      const EdgeChoice choice = sample_edge(*node, level_space, rng, config_.level_base);

      Segment segment = level_space.segment(choice.level, choice.index);
      if (at_root) {
        parameters.assign(segment.values.begin() + static_cast<std::ptrdiff_t>(signal_dims), segment.values.end());
        segment.values.resize(signal_dims);
      }
      segment.values.insert(segment.values.end(), parameters.begin(), parameters.end());
      segment.duration = std::min(segment.duration, horizon_time - t);
      t += segment.duration;
      segments.push_back(std::move(segment));

      if (choice.is_new()) {
        pending.push_back(Pending{node, choice.level, choice.index, std::make_unique<SearchNode>(space_), t});
        node = pending.back().child.get();
      } else {
        Edge &edge = node->levels[choice.level].explored[choice.edge];
        path.push_back(&edge);
        node = edge.child.get();
        visited.push_back(node);
      }
    }

    if (abandoned || pending.empty()) {
      close_upward(visited);
      ++abandoned_in_a_row;
      continue;
    }
    abandoned_in_a_row = 0;

    const InputSignal input(total_dims, segments);
    const Trace trace = model_.simulate(input, step_);
    ++outcome.iterations;
    const double full = rho(requirement_, trace);
    outcome.best_robustness = std::min(outcome.best_robustness, full);

    const std::size_t first_new = path.size();
    for (std::size_t j = 0; j < pending.size(); ++j) {
      Pending &p = pending[j];
      const RobustnessInterval bounds = rho_bounds(requirement_, prefix(trace, std::min(p.end, trace.length())));
      if (bounds.hi < 0.0) {
        std::vector<Segment> witness(segments.begin(), segments.begin() + static_cast<std::ptrdiff_t>(first_new + j + 1));
        outcome.status = Status::Falsified;
        outcome.witness = InputSignal(total_dims, std::move(witness));
        outcome.robustness = bounds.hi;
        return outcome;
      }
      if (bounds.lo > 0.0 || p.end >= horizon_time - slack) {
        discarded_.push_back(Discard{p.parent, p.level, p.index});
        break;
      }
      auto &explored = p.parent->levels[p.level].explored;
      explored.push_back(Edge{p.index, std::move(p.child), bounds.hi, kInfinity});
      path.push_back(&explored.back());
    }
    backpropagate(path, full);
  }

  outcome.status = Status::BudgetReached;
  outcome.robustness = outcome.best_robustness;
  return outcome;
}

FalsificationOutcome alvts(SystemModel &model, const Formula &requirement, const SegmentSpace &space,
                           const SearchConfig &config, Rng &rng) {
  AlvtsSearch search(model, requirement, space, config);
  return search.run(rng);
}

FalsificationOutcome random_search(SystemModel &model, const Formula &requirement, const SegmentSpace &space,
                                   const SearchConfig &config, Rng &rng) {
  const unsigned k = config.random_control_points;
  if (k == 0) {
    throw ValidationError("random search needs at least one control point");
  }
  if (config.max_iterations == 0) {
    throw ValidationError("max_iterations must be at least 1");
  }
  const double horizon_time = space.time_horizon();
  if (horizon(requirement) > horizon_time * (1.0 + kTimeSlack)) {
    throw ValidationError(fmt::format("requirement horizon {} exceeds the input horizon {}", horizon(requirement),
                                      horizon_time));
  }
  const std::size_t dims = space.dimension() + config.parameters.size();
  if (model.input_dimension() != dims) {
    throw ValidationError(
        fmt::format("model takes {} inputs, search space provides {}", model.input_dimension(), dims));
  }
  const double step = default_step(space, config.step);
  const auto draw = [&rng](const InputDomain &d) { return d.lo + rng.uniform() * (d.hi - d.lo); };

  FalsificationOutcome outcome;
  while (outcome.iterations < config.max_iterations) {
    std::vector<double> parameters;
    for (const auto &d : config.parameters) {
      parameters.push_back(draw(d));
    }
    std::vector<Segment> segments;
    for (unsigned i = 0; i < k; ++i) {
      Segment s;
      const double start = horizon_time * i / k;
      const double end = i + 1 == k ? horizon_time : horizon_time * (i + 1) / k;
      s.duration = end - start;
      for (const auto &d : space.domains()) {
        s.values.push_back(draw(d));
      }
      s.values.insert(s.values.end(), parameters.begin(), parameters.end());
      segments.push_back(std::move(s));
    }
    InputSignal input(dims, std::move(segments));
    const Trace trace = model.simulate(input, step);
    ++outcome.iterations;
    const double r = rho(requirement, trace);
    outcome.best_robustness = std::min(outcome.best_robustness, r);
    if (r < 0.0) {
      outcome.status = Status::Falsified;
      outcome.witness = std::move(input);
      outcome.robustness = r;
      return outcome;
    }
  }
  outcome.status = Status::BudgetReached;
  outcome.robustness = outcome.best_robustness;
  return outcome;
}

FalsificationOutcome run_search(SystemModel &model, const Formula &requirement, const SegmentSpace &space,
                                const SearchConfig &config) {
  Rng rng(config.seed);
  return config.solver == Solver::Alvts ? alvts(model, requirement, space, config, rng)
                                        : random_search(model, requirement, space, config, rng);
}

} // namespace falsify
