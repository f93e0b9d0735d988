#pragma once

#include "falsify/inputspace.hpp"
#include "falsify/models.hpp"
#include "falsify/robustness.hpp"
#include "falsify/stl.hpp"

#include <cstddef>
#include <cstdint>
#include <deque>
#include <memory>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace falsify {

/// Random source with bit-reproducible draws on every platform. The
/// standard distributions are implementation-defined, so the conversions
/// are done here.
class Rng {
public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t bits() { return engine_(); }
  /// Uniform on [0, 1).
  double uniform();
  /// Uniform on [0, n); n must be positive.
  std::uint64_t below(std::uint64_t n);

private:
  std::mt19937_64 engine_;
};

/// Indices [0, size) not yet drawn. Draws are uniform without replacement
/// and only the displaced entries are stored.
class UnexploredPool {
public:
  explicit UnexploredPool(std::uint64_t size) : remaining_(size) {}

  std::uint64_t remaining() const { return remaining_; }
  bool empty() const { return remaining_ == 0; }
  std::uint64_t draw(Rng &rng);
  std::vector<std::uint64_t> members() const;

private:
  std::uint64_t at(std::uint64_t slot) const;

  std::uint64_t remaining_;
  std::unordered_map<std::uint64_t, std::uint64_t> moved_;
};

class SearchNode;

/// Explored edge: a tried segment whose prefix stayed inconclusive.
struct Edge {
  std::uint64_t index = 0;
  std::unique_ptr<SearchNode> child;
  /// Upper robustness bound of the prefix ending with this segment.
  double prefix_score = kInfinity;
  /// Least full-trace robustness among simulations through this edge.
  double suffix_score = kInfinity;
};

struct LevelEdges {
  UnexploredPool unexplored;
  std::deque<Edge> explored;
};

/// Tree node for one input prefix, holding per-level edge sets.
class SearchNode {
public:
  explicit SearchNode(const SegmentSpace &space);

  std::deque<LevelEdges> levels;
  /// Set once the node and every subtree below it have no edges left.
  bool closed = false;

  bool exhausted() const;
  bool has_explored() const;
};

/// w_l = (|unexplored_l| + |explored_l|) / (base^l * |A_l|).
double level_weight(const SearchNode &node, unsigned level, const SegmentSpace &space, double base = 2.0);

/// Draws a level with probability proportional to its weight.
unsigned choose_level(const SearchNode &node, const SegmentSpace &space, Rng &rng, double base = 2.0);

enum class Strategy { Explore = 1, Revisit = 2, BestPrefix = 3, BestSuffix = 4 };

struct EdgeChoice {
  unsigned level = 0;
  Strategy strategy = Strategy::Explore;
  /// Segment index within A_level.
  std::uint64_t index = 0;
  /// Position in explored[level] for the exploiting strategies.
  std::size_t edge = 0;

  bool is_new() const { return strategy == Strategy::Explore; }
};

/// Samples from the distribution D at a node. An Explore choice removes the
/// index from the unexplored pool. Throws if the node is exhausted.
EdgeChoice sample_edge(SearchNode &node, const SegmentSpace &space, Rng &rng, double base = 2.0);

/// Lowers each edge's suffix score to the robustness of the full trace.
void backpropagate(std::span<Edge *const> path, double robustness);

enum class Solver { Alvts, Random };
enum class Status { Falsified, Exhausted, BudgetReached };

std::string to_string(Solver solver);
std::string to_string(Status status);
Solver parse_solver(const std::string &name);

struct SearchConfig {
  std::size_t max_iterations = 300;
  std::uint64_t seed = 0;
  Solver solver = Solver::Alvts;
  /// Output sampling period; zero selects T / 300.
  double step = 0.0;
  /// Constant inputs chosen once per signal, appended after the signal
  /// dimensions.
  std::vector<InputDomain> parameters;
  double level_base = 2.0;
  /// Equal-length segments per random sample.
  unsigned random_control_points = 4;
};

struct FalsificationOutcome {
  Status status = Status::BudgetReached;
  std::optional<InputSignal> witness;
  /// Upper robustness bound of the witness trace, or the best robustness
  /// seen when nothing was falsified.
  double robustness = kInfinity;
  std::size_t iterations = 0;
  double best_robustness = kInfinity;
};

/// Adaptive Las Vegas tree search with one whole-horizon simulation per
/// iteration.
class AlvtsSearch {
public:
  AlvtsSearch(SystemModel &model, Formula requirement, SegmentSpace space, SearchConfig config);

  FalsificationOutcome run(Rng &rng);

  const SearchNode &root() const { return *root_; }
  const SegmentSpace &root_space() const { return root_space_; }
  const SegmentSpace &space() const { return space_; }
  double step() const { return step_; }

  /// Segment indices whose prefixes were proven satisfied and dropped, as
  /// (node, level, index).
  struct Discard {
    const SearchNode *node;
    unsigned level;
    std::uint64_t index;
  };
  const std::vector<Discard> &discarded() const { return discarded_; }

private:
  void close_upward(std::span<SearchNode *const> nodes);

  SystemModel &model_;
  Formula requirement_;
  SegmentSpace space_;
  SegmentSpace root_space_;
  SearchConfig config_;
  double step_;
  std::unique_ptr<SearchNode> root_;
  std::vector<Discard> discarded_;
};

FalsificationOutcome alvts(SystemModel &model, const Formula &requirement, const SegmentSpace &space,
                           const SearchConfig &config, Rng &rng);

/// Baseline: independent uniformly drawn signals with equal-length segments.
FalsificationOutcome random_search(SystemModel &model, const Formula &requirement, const SegmentSpace &space,
                                   const SearchConfig &config, Rng &rng);

/// Dispatches on config.solver with a generator seeded from config.seed.
FalsificationOutcome run_search(SystemModel &model, const Formula &requirement, const SegmentSpace &space,
                                const SearchConfig &config);

} // namespace falsify
