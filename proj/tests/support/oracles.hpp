#pragma once

// Slow reference evaluators and random generators shared by the tests. They
// follow the definitions directly, with none of the library's windowing.

#include "falsify/robustness.hpp"
#include "falsify/signal.hpp"
#include "falsify/stl.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <vector>

namespace oracle {

using falsify::Affine;
using falsify::Formula;
using falsify::Interval;
using falsify::Trace;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Equal, or within tol when finite.
inline bool close(double a, double b, double tol = 1e-9) { return a == b || std::abs(a - b) <= tol; }

inline long first_index(double t) { return static_cast<long>(std::ceil(t - 1e-9)); }
inline long last_index(double t) { return static_cast<long>(std::floor(t + 1e-9)); }

/// Plain recursive robustness at sample i of a trace with step 1 (times are
/// in samples). Samples past the end are an error.
inline double rho(const Formula &phi, const Trace &y, long i) {
  const auto at = [&](long k) {
    if (k < 0 || k >= static_cast<long>(y.size())) {
      throw std::out_of_range("oracle: sample out of range");
    }
    return k;
  };
  switch (phi.kind()) {
  case Formula::Kind::Atom:
    return phi.affine()(y.row(static_cast<std::size_t>(at(i))));
  case Formula::Kind::Not:
    return -rho(phi.child(0), y, i);
  case Formula::Kind::And: {
    double r = kInf;
    for (std::size_t c = 0; c < phi.arity(); ++c) {
      r = std::min(r, rho(phi.child(c), y, i));
    }
    return r;
  }
  case Formula::Kind::Or: {
    double r = -kInf;
    for (std::size_t c = 0; c < phi.arity(); ++c) {
      r = std::max(r, rho(phi.child(c), y, i));
    }
    return r;
  }
  case Formula::Kind::Always:
  case Formula::Kind::Eventually: {
    const bool always = phi.kind() == Formula::Kind::Always;
    double r = always ? kInf : -kInf;
    for (long k = i + first_index(phi.interval().lo); k <= i + last_index(phi.interval().hi); ++k) {
      const double v = rho(phi.child(0), y, k);
      r = always ? std::min(r, v) : std::max(r, v);
    }
    return r;
  }
  case Formula::Kind::Until: {
    double r = -kInf;
    for (long j = i + first_index(phi.interval().lo); j <= i + last_index(phi.interval().hi); ++j) {
      double guard = kInf;
      for (long k = i; k < j; ++k) {
        guard = std::min(guard, rho(phi.child(0), y, k));
      }
      r = std::max(r, std::min(guard, rho(phi.child(1), y, j)));
    }
    return r;
  }
  }
  return 0.0;
}

/// Boolean satisfaction at sample i; atoms hold when f >= 0.
inline bool holds(const Formula &phi, const Trace &y, long i) {
  switch (phi.kind()) {
  case Formula::Kind::Atom:
    return phi.affine()(y.row(static_cast<std::size_t>(i))) >= 0.0;
  case Formula::Kind::Not:
    return !holds(phi.child(0), y, i);
  case Formula::Kind::And:
    for (std::size_t c = 0; c < phi.arity(); ++c) {
      if (!holds(phi.child(c), y, i)) {
        return false;
      }
    }
    return true;
  case Formula::Kind::Or:
    for (std::size_t c = 0; c < phi.arity(); ++c) {
      if (holds(phi.child(c), y, i)) {
        return true;
      }
    }
    return false;
  case Formula::Kind::Always:
    for (long k = i + first_index(phi.interval().lo); k <= i + last_index(phi.interval().hi); ++k) {
      if (!holds(phi.child(0), y, k)) {
        return false;
      }
    }
    return true;
  case Formula::Kind::Eventually:
    for (long k = i + first_index(phi.interval().lo); k <= i + last_index(phi.interval().hi); ++k) {
      if (holds(phi.child(0), y, k)) {
        return true;
      }
    }
    return false;
  case Formula::Kind::Until:
    for (long j = i + first_index(phi.interval().lo); j <= i + last_index(phi.interval().hi); ++j) {
      bool guard = true;
      for (long k = i; k < j && guard; ++k) {
        guard = holds(phi.child(0), y, k);
      }
      if (guard && holds(phi.child(1), y, j)) {
        return true;
      }
    }
    return false;
  }
  return false;
}

/// Random formula over `columns` outputs. Intervals have integer or
/// half-integer endpoints so some windows fall between samples.
inline Formula random_formula(std::mt19937_64 &rng, int depth, std::size_t columns, int max_hi = 4) {
  std::uniform_int_distribution<int> pick(0, depth <= 0 ? 0 : 7);
  std::uniform_int_distribution<std::size_t> column(0, columns - 1);
  std::uniform_int_distribution<int> constant(-3, 3);
  std::uniform_int_distribution<int> end(0, 2 * max_hi);
  const auto interval = [&] {
    double a = end(rng) / 2.0;
    double b = end(rng) / 2.0;
    if (a > b) {
      std::swap(a, b);
    }
    return Interval{a, b};
  };
  switch (pick(rng)) {
  case 0: {
    Affine f = Affine(constant(rng)) + Affine::variable(column(rng), (rng() & 1) ? 1.0 : -1.0);
    if (columns > 1 && (rng() & 3) == 0) {
      f = f + Affine::variable(column(rng), 0.5);
    }
    return Formula::atom(f);
  }
  case 1:
    return Formula::negation(random_formula(rng, depth - 1, columns, max_hi));
  case 2:
    return Formula::conjunction(random_formula(rng, depth - 1, columns, max_hi),
                                random_formula(rng, depth - 1, columns, max_hi));
  case 3:
    return Formula::disjunction(random_formula(rng, depth - 1, columns, max_hi),
                                random_formula(rng, depth - 1, columns, max_hi));
  case 4:
    return Formula::always(interval(), random_formula(rng, depth - 1, columns, max_hi));
  case 5:
    return Formula::eventually(interval(), random_formula(rng, depth - 1, columns, max_hi));
  case 6:
    return Formula::until(interval(), random_formula(rng, depth - 1, columns, max_hi),
                          random_formula(rng, depth - 1, columns, max_hi));
  default:
    return Formula::implication(random_formula(rng, depth - 1, columns, max_hi),
                                random_formula(rng, depth - 1, columns, max_hi));
  }
}

/// Trace with step 1 and small integer values, so ties and zeros occur.
inline Trace random_trace(std::mt19937_64 &rng, std::size_t columns, std::size_t samples) {
  std::uniform_int_distribution<int> value(-4, 4);
  Trace y(columns, 1.0);
  std::vector<double> row(columns);
  for (std::size_t i = 0; i < samples; ++i) {
    for (auto &v : row) {
      v = value(rng);
    }
    y.push_back(row);
  }
  return y;
}

/// First `samples` rows of y.
inline Trace head(const Trace &y, std::size_t samples) {
  Trace out(y.dimension(), y.step());
  for (std::size_t i = 0; i < samples; ++i) {
    out.push_back(y.row(i));
  }
  return out;
}

} // namespace oracle
