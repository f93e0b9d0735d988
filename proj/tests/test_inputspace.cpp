#include "falsify/error.hpp"
#include "falsify/inputspace.hpp"

#include <gtest/gtest.h>

#include <chrono>
#include <cmath>
#include <numeric>
#include <set>

using namespace falsify;

namespace {

const std::uint64_t kTable2[] = {4, 4, 9, 20, 44, 96, 208, 448, 960, 2048, 4352};
const std::uint64_t kTable3[] = {8, 12, 30, 73, 174, 408, 944, 2160, 4896, 11008, 24576};

SegmentSpace unit_space(std::size_t n, unsigned levels, double lo = 0.0, double hi = 1.0) {
  std::vector<InputDomain> domains;
  for (std::size_t i = 0; i < n; ++i) {
    domains.push_back({"x" + std::to_string(i), lo, hi});
  }
  return SegmentSpace(domains, std::vector<unsigned>(levels, 1), 1.0);
}

// Enumerates A_l straight from the definition: every budget, every
// combination of per-dimension proportions.
std::set<std::vector<std::pair<std::uint64_t, std::uint64_t>>> enumerate_level(std::size_t n, unsigned l) {
  std::set<std::vector<std::pair<std::uint64_t, std::uint64_t>>> out;
  std::vector<unsigned> b(n, 0);
  const std::function<void(std::size_t, unsigned)> split = [&](std::size_t i, unsigned left) {
    if (i + 1 == n) {
      b[i] = left;
      std::vector<std::pair<std::uint64_t, std::uint64_t>> point(n);
      const std::function<void(std::size_t)> fill = [&](std::size_t d) {
        if (d == n) {
          out.insert(point);
          return;
        }
        if (b[d] == 0) {
          for (std::uint64_t num : {0u, 1u}) {
            point[d] = {num, 1};
            fill(d + 1);
          }
          return;
        }
        const std::uint64_t den = std::uint64_t{1} << b[d];
        for (std::uint64_t num = 1; num < den; num += 2) {
          point[d] = {num, den};
          fill(d + 1);
        }
      };
      fill(0);
      return;
    }
    for (unsigned k = 0; k <= left; ++k) {
      b[i] = k;
      split(i + 1, left - k);
    }
  };
  split(0, l);
  return out;
}

} // namespace

TEST(Proportions, FirstLevels) {
  EXPECT_EQ(proportions(0), (std::vector<Proportion>{{0, 1}, {1, 1}}));
  EXPECT_EQ(proportions(1), (std::vector<Proportion>{{1, 2}}));
  EXPECT_EQ(proportions(2), (std::vector<Proportion>{{1, 4}, {3, 4}}));
  EXPECT_EQ(proportions(3).size(), 4u);
}

TEST(Proportions, CountsAndDisjointness) {
  std::set<std::pair<std::uint64_t, std::uint64_t>> seen;
  for (unsigned l = 0; l <= 10; ++l) {
    const auto p = proportions(l);
    EXPECT_EQ(p.size(), proportion_count(l));
    EXPECT_EQ(p.size(), l == 0 ? 2u : (1u << (l - 1)));
    for (const auto &q : p) {
      EXPECT_EQ(std::gcd(q.num, q.den), 1u);
      EXPECT_TRUE(seen.insert({q.num, q.den}).second) << q.num << "/" << q.den;
    }
  }
}

TEST(Budgets, Examples) {
  EXPECT_EQ(budgets(2, 3), (std::vector<Budget>{{0, 3}, {1, 2}, {2, 1}, {3, 0}}));
  EXPECT_EQ(budgets(1, 5), (std::vector<Budget>{{5}}));
  EXPECT_EQ(budgets(3, 2).size(), 6u);
  for (std::size_t n = 1; n <= 4; ++n) {
    for (unsigned l = 0; l <= 6; ++l) {
      const auto all = budgets(n, l);
      // C(l + n - 1, n - 1)
      double expected = 1;
      for (std::size_t k = 1; k < n; ++k) {
        expected = expected * static_cast<double>(l + k) / static_cast<double>(k);
      }
      EXPECT_EQ(all.size(), static_cast<std::size_t>(std::llround(expected)));
      EXPECT_TRUE(std::is_sorted(all.begin(), all.end()));
      for (const auto &b : all) {
        EXPECT_EQ(std::accumulate(b.begin(), b.end(), 0u), l);
      }
    }
  }
}

TEST(LevelSize, TableValues) {
  const auto start = std::chrono::steady_clock::now();
  const SegmentSpace two = unit_space(2, 11);
  const SegmentSpace three = unit_space(3, 11);
  for (unsigned l = 0; l <= 10; ++l) {
    EXPECT_EQ(two.level_size(l), kTable2[l]) << "l=" << l;
    EXPECT_EQ(three.level_size(l), kTable3[l]) << "l=" << l;
  }
  EXPECT_LT(std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count(), 1.0);
}

TEST(LevelSize, MatchesEnumeration) {
  for (std::size_t n = 1; n <= 3; ++n) {
    const SegmentSpace space = unit_space(n, 7);
    for (unsigned l = 0; l <= 6; ++l) {
      EXPECT_EQ(space.level_size(l), enumerate_level(n, l).size()) << "n=" << n << " l=" << l;
    }
  }
}

TEST(SegmentIndex, IsBijectionOntoLevel) {
  for (std::size_t n = 1; n <= 3; ++n) {
    const SegmentSpace space = unit_space(n, 6);
    for (unsigned l = 0; l <= 5; ++l) {
      const auto expected = enumerate_level(n, l);
      std::set<std::vector<std::pair<std::uint64_t, std::uint64_t>>> got;
      for (std::uint64_t i = 0; i < space.level_size(l); ++i) {
        const auto d = space.decompose(l, i);
        EXPECT_EQ(std::accumulate(d.budget.begin(), d.budget.end(), 0u), l);
        std::vector<std::pair<std::uint64_t, std::uint64_t>> point;
        for (const auto &p : d.proportions) {
          point.emplace_back(p.num, p.den);
        }
        got.insert(point);
      }
      EXPECT_EQ(got, expected) << "n=" << n << " l=" << l;
    }
  }
}

TEST(SegmentIndex, ValuesDecompose) {
  const SegmentSpace space({{"a", -3.0, 5.0}, {"b", 10.0, 12.0}}, {2, 2, 3, 3, 3, 4}, 30.0);
  for (unsigned l = 0; l <= space.max_level(); ++l) {
    for (std::uint64_t i = 0; i < space.level_size(l); ++i) {
      const Segment s = space.segment(l, i);
      const auto d = space.decompose(l, i);
      EXPECT_DOUBLE_EQ(s.duration, space.duration(l));
      for (std::size_t k = 0; k < 2; ++k) {
        const auto &dom = space.domains()[k];
        EXPECT_NEAR(s.values[k], dom.lo + d.proportions[k].value() * (dom.hi - dom.lo), 1e-12);
        if (d.budget[k] > 0) {
          EXPECT_EQ(d.proportions[k].den, std::uint64_t{1} << d.budget[k]);
          EXPECT_EQ(d.proportions[k].num % 2, 1u);
        }
      }
    }
  }
}

TEST(SegmentIndex, LevelsDisjointForPositiveRanges) {
  const SegmentSpace space({{"a", 0.0, 100.0}, {"b", 0.0, 100.0}}, {2, 2, 3, 3, 3, 4}, 30.0);
  std::set<std::vector<double>> seen;
  for (unsigned l = 0; l <= space.max_level(); ++l) {
    for (std::uint64_t i = 0; i < space.level_size(l); ++i) {
      EXPECT_TRUE(seen.insert(space.segment(l, i).values).second);
    }
  }
}

TEST(SegmentIndex, EndpointsExact) {
  const SegmentSpace space({{"a", 0.1, 0.7}}, {1}, 1.0);
  EXPECT_EQ(space.segment(0, 0).values[0], 0.1);
  EXPECT_EQ(space.segment(0, 1).values[0], 0.7);
}

TEST(SegmentSpace, OneDimensionalExample) {
  const SegmentSpace space({{"x", 0.0, 10.0}}, {1, 2, 3}, 30.0);
  EXPECT_EQ(space.level_size(2), 2u);
  EXPECT_EQ(space.segment(2, 0), (Segment{10.0, {2.5}}));
  EXPECT_EQ(space.segment(2, 1), (Segment{10.0, {7.5}}));
  EXPECT_THROW(space.segment(3, 0), Error);
  EXPECT_THROW(space.segment(2, 2), Error);
}

TEST(SegmentSpace, ZeroWidthDomainAllowed) {
  const SegmentSpace space({{"x", 5.0, 5.0}, {"y", 0.0, 1.0}}, {1, 1}, 1.0);
  EXPECT_EQ(space.level_size(1), 4u);
  EXPECT_EQ(space.segment(1, 0).values[0], 5.0);
}

TEST(SegmentSpace, ValidatesConstruction) {
  EXPECT_THROW(SegmentSpace({}, {1}, 1.0), ValidationError);
  EXPECT_THROW(SegmentSpace({{"x", 1.0, 0.0}}, {1}, 1.0), ValidationError);
  EXPECT_THROW(SegmentSpace({{"x", 0.0, 1.0}}, {}, 1.0), ValidationError);
  EXPECT_THROW(SegmentSpace({{"x", 0.0, 1.0}}, {0}, 1.0), ValidationError);
  EXPECT_THROW(SegmentSpace({{"x", 0.0, 1.0}}, {1}, 0.0), ValidationError);
}

TEST(SegmentSpace, ExtraDimensionsAppend) {
  const SegmentSpace space({{"a", 0.0, 1.0}, {"b", 0.0, 1.0}}, {2, 2, 3}, 30.0);
  const SegmentSpace root = space.with_extra_dimensions({{"p", 10.0, 20.0}});
  EXPECT_EQ(root.dimension(), 3u);
  EXPECT_EQ(root.control_points(), space.control_points());
  EXPECT_EQ(root.level_size(0), 8u);
  EXPECT_EQ(root.level_size(1), 12u);
}

TEST(SegmentSpace, Durations) {
  const SegmentSpace space({{"a", 0.0, 1.0}}, {2, 2, 3, 3, 3, 4}, 30.0);
  EXPECT_EQ(space.duration(0), 15.0);
  EXPECT_EQ(space.duration(2), 10.0);
  EXPECT_EQ(space.duration(5), 7.5);
}
