#pragma once

#include "falsify/signal.hpp"

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace falsify {

/// Exact dyadic proportion num / den, always in lowest terms.
struct Proportion {
  std::uint64_t num = 0;
  std::uint64_t den = 1;

  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
  bool operator==(const Proportion &) const = default;
};

/// Value range [lo, hi] of one input dimension.
struct InputDomain {
  std::string name;
  double lo = 0.0;
  double hi = 0.0;
};

using Budget = std::vector<unsigned>;

/// Proportions of the value range usable at granularity level l: {0, 1} at
/// level 0, the odd multiples of 2^-l otherwise.
std::vector<Proportion> proportions(unsigned level);

/// Number of proportions at a level without enumerating them.
std::uint64_t proportion_count(unsigned level);

/// All ways to split `level` among `dimensions` ordered non-negative parts,
/// in lexicographic order.
std::vector<Budget> budgets(std::size_t dimensions, unsigned level);

/// The leveled set of candidate input segments. Segments are addressed by
/// (level, index) with a mixed-radix scheme: budgets in lexicographic order,
/// then per-dimension proportion indices with the first dimension most
/// significant. Nothing is materialized per query.
class SegmentSpace {
public:
  SegmentSpace(std::vector<InputDomain> domains, std::vector<unsigned> control_points, double time_horizon);

  std::size_t dimension() const { return domains_.size(); }
  const std::vector<InputDomain> &domains() const { return domains_; }
  const std::vector<unsigned> &control_points() const { return control_points_; }
  unsigned max_level() const { return static_cast<unsigned>(control_points_.size() - 1); }
  std::size_t level_count() const { return control_points_.size(); }
  double time_horizon() const { return time_horizon_; }

  /// Segment duration T / k_l at a level.
  double duration(unsigned level) const;

  /// |A_l|, computed in closed form.
  std::uint64_t level_size(unsigned level) const;

  Segment segment(unsigned level, std::uint64_t index) const;

  /// Budget tuple and per-dimension proportions behind an index.
  struct Decomposition {
    Budget budget;
    std::vector<Proportion> proportions;
  };
  Decomposition decompose(unsigned level, std::uint64_t index) const;

  /// Same levels and horizon with extra dimensions appended.
  SegmentSpace with_extra_dimensions(const std::vector<InputDomain> &extra) const;

private:
  struct LevelTable {
    std::vector<Budget> budgets;
    // first index of each budget's block, plus the total as last entry
    std::vector<std::uint64_t> offsets;
  };
  const LevelTable &table(unsigned level) const;
  void check_level(unsigned level) const;

  std::vector<InputDomain> domains_;
  std::vector<unsigned> control_points_;
  double time_horizon_;
  std::vector<LevelTable> tables_;
};

} // namespace falsify
