#include "falsify/inputspace.hpp"

#include "falsify/error.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>

namespace falsify {

namespace {

constexpr unsigned kMaxLevel = 62;

std::uint64_t checked_mul(std::uint64_t a, std::uint64_t b) {
  std::uint64_t r = 0;
  if (__builtin_mul_overflow(a, b, &r)) {
    throw Error("segment set too large to index");
  }
  return r;
}

std::uint64_t checked_add(std::uint64_t a, std::uint64_t b) {
  std::uint64_t r = 0;
  if (__builtin_add_overflow(a, b, &r)) {
    throw Error("segment set too large to index");
  }
  return r;
}

void compose(std::size_t dimensions, unsigned remaining, Budget &current, std::vector<Budget> &out) {
  if (current.size() + 1 == dimensions) {
    current.push_back(remaining);
    out.push_back(current);
    current.pop_back();
    return;
  }
  for (unsigned part = 0; part <= remaining; ++part) {
    current.push_back(part);
    compose(dimensions, remaining - part, current, out);
    current.pop_back();
  }
}

Proportion proportion_at(unsigned level, std::uint64_t j) {
  if (level == 0) {
    return j == 0 ? Proportion{0, 1} : Proportion{1, 1};
  }
  return Proportion{2 * j + 1, std::uint64_t{1} << level};
}

} // namespace

std::vector<Proportion> proportions(unsigned level) {
  if (level > 24) {
    throw Error(fmt::format("refusing to enumerate 2^{} proportions", level - 1));
  }
  const std::uint64_t count = proportion_count(level);
  std::vector<Proportion> result;
  result.reserve(count);
  for (std::uint64_t j = 0; j < count; ++j) {
    result.push_back(proportion_at(level, j));
  }
  return result;
}

std::uint64_t proportion_count(unsigned level) {
  if (level > kMaxLevel) {
    throw Error(fmt::format("level {} exceeds the supported maximum {}", level, kMaxLevel));
  }
  return level == 0 ? 2 : std::uint64_t{1} << (level - 1);
}

std::vector<Budget> budgets(std::size_t dimensions, unsigned level) {
  if (dimensions == 0) {
    throw Error("budgets need at least one dimension");
  }
  std::vector<Budget> out;
  Budget current;
  compose(dimensions, level, current, out);
  return out;
}

SegmentSpace::SegmentSpace(std::vector<InputDomain> domains, std::vector<unsigned> control_points,
                           double time_horizon)
    : domains_(std::move(domains)), control_points_(std::move(control_points)), time_horizon_(time_horizon) {
  if (domains_.empty()) {
    throw ValidationError("input space needs at least one dimension");
  }
  for (const auto &d : domains_) {
    if (!std::isfinite(d.lo) || !std::isfinite(d.hi) || d.lo > d.hi) {
      throw ValidationError(fmt::format("input '{}' has invalid range [{}, {}]", d.name, d.lo, d.hi));
    }
  }
  if (control_points_.empty()) {
    throw ValidationError("input space needs at least one level");
  }
  if (control_points_.size() > kMaxLevel + 1) {
    throw ValidationError(fmt::format("at most {} levels are supported", kMaxLevel + 1));
  }
  for (unsigned k : control_points_) {
    if (k == 0) {
      throw ValidationError("control point counts must be positive");
    }
  }
  if (!(time_horizon_ > 0.0) || !std::isfinite(time_horizon_)) {
    throw ValidationError(fmt::format("time horizon must be positive, got {}", time_horizon_));
  }
  tables_.reserve(control_points_.size());
  for (unsigned level = 0; level < control_points_.size(); ++level) {
    LevelTable t;
    t.budgets = budgets(domains_.size(), level);
    std::uint64_t offset = 0;
    for (const auto &b : t.budgets) {
      t.offsets.push_back(offset);
      std::uint64_t block = 1;
      for (unsigned part : b) {
        block = checked_mul(block, proportion_count(part));
      }
      offset = checked_add(offset, block);
    }
    t.offsets.push_back(offset);
    tables_.push_back(std::move(t));
  }
}

void SegmentSpace::check_level(unsigned level) const {
  if (level > max_level()) {
    throw Error(fmt::format("level {} exceeds maximum level {}", level, max_level()));
  }
}

const SegmentSpace::LevelTable &SegmentSpace::table(unsigned level) const {
  check_level(level);
  return tables_[level];
}

double SegmentSpace::duration(unsigned level) const {
  check_level(level);
  return time_horizon_ / static_cast<double>(control_points_[level]);
}

std::uint64_t SegmentSpace::level_size(unsigned level) const {
  check_level(level);
  // ways[s]: weighted count of budget prefixes spending s over the
  // dimensions seen so far.
  std::vector<std::uint64_t> ways(level + 1, 0);
  ways[0] = 1;
  for (std::size_t d = 0; d < domains_.size(); ++d) {
    std::vector<std::uint64_t> next(level + 1, 0);
    for (unsigned spent = 0; spent <= level; ++spent) {
      if (ways[spent] == 0) {
        continue;
      }
      for (unsigned part = 0; spent + part <= level; ++part) {
        next[spent + part] = checked_add(next[spent + part], checked_mul(ways[spent], proportion_count(part)));
      }
    }
    ways = std::move(next);
  }
  return ways[level];
}

SegmentSpace::Decomposition SegmentSpace::decompose(unsigned level, std::uint64_t index) const {
  const LevelTable &t = table(level);
  if (index >= t.offsets.back()) {
    throw Error(fmt::format("segment index {} out of range for level {} (size {})", index, level, t.offsets.back()));
  }
  const auto block = std::upper_bound(t.offsets.begin(), t.offsets.end(), index) - t.offsets.begin() - 1;
  Decomposition result;
  result.budget = t.budgets[static_cast<std::size_t>(block)];
  std::uint64_t rest = index - t.offsets[static_cast<std::size_t>(block)];
  result.proportions.resize(domains_.size());
  for (std::size_t d = domains_.size(); d-- > 0;) {
    const std::uint64_t radix = proportion_count(result.budget[d]);
    result.proportions[d] = proportion_at(result.budget[d], rest % radix);
    rest /= radix;
  }
  return result;
}

Segment SegmentSpace::segment(unsigned level, std::uint64_t index) const {
  const Decomposition parts = decompose(level, index);
  Segment s;
  s.duration = duration(level);
  s.values.reserve(domains_.size());
  for (std::size_t d = 0; d < domains_.size(); ++d) {
    const auto &domain = domains_[d];
    const Proportion &p = parts.proportions[d];
    if (p.num == 0) {
      s.values.push_back(domain.lo);
    } else if (p.num == p.den) {
      s.values.push_back(domain.hi);
    } else {
      s.values.push_back(domain.lo + p.value() * (domain.hi - domain.lo));
    }
  }
  return s;
}

SegmentSpace SegmentSpace::with_extra_dimensions(const std::vector<InputDomain> &extra) const {
  std::vector<InputDomain> all = domains_;
  all.insert(all.end(), extra.begin(), extra.end());
  return SegmentSpace(std::move(all), control_points_, time_horizon_);
}

} // namespace falsify
