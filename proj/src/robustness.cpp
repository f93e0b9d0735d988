#include "falsify/robustness.hpp"

#include "falsify/error.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <deque>

namespace falsify {

namespace {

constexpr double kIndexSlack = 1e-9;

// Robustness signals for the lower and upper bound at every index. For a
// fully known trace the two coincide.
struct BoundSignals {
  std::vector<double> lo;
  std::vector<double> hi;
};

std::vector<double> until_signal(std::span<const double> lhs, std::span<const double> rhs, IndexWindow window) {
  const std::size_t n = lhs.size();
  std::vector<double> out(n, -kInfinity);
  if (window.first > window.last) {
    return out;
  }
  for (std::size_t i = 0; i < n; ++i) {
    double lhs_min = kInfinity;
    double best = -kInfinity;
    // lhs_min holds the minimum of lhs over [i, j) when rhs[j] is visited.
    for (std::size_t j = i; j < n && j <= i + window.last; ++j) {
      if (j >= i + window.first) {
        best = std::max(best, std::min(lhs_min, rhs[j]));
      }
      lhs_min = std::min(lhs_min, lhs[j]);
    }
    out[i] = best;
  }
  return out;
}

std::vector<double> window_signal(std::span<const double> values, IndexWindow window, Extremum mode) {
  if (window.first > window.last) {
    return std::vector<double>(values.size(), mode == Extremum::Min ? kInfinity : -kInfinity);
  }
  return sliding_window_extrema(values, window.first, window.last, mode);
}

BoundSignals evaluate(const Formula &phi, const Trace &y, std::size_t length) {
  switch (phi.kind()) {
  case Formula::Kind::Atom: {
    BoundSignals s{std::vector<double>(length, -kInfinity), std::vector<double>(length, kInfinity)};
    const std::size_t known = std::min(length, y.size());
    for (std::size_t i = 0; i < known; ++i) {
      s.lo[i] = s.hi[i] = phi.affine()(y.row(i));
    }
    return s;
  }
  case Formula::Kind::Not: {
    BoundSignals c = evaluate(phi.child(0), y, length);
    BoundSignals s{std::move(c.hi), std::move(c.lo)};
    for (auto &v : s.lo) {
      v = -v;
    }
    for (auto &v : s.hi) {
      v = -v;
    }
    return s;
  }
  case Formula::Kind::And:
  case Formula::Kind::Or: {
    BoundSignals a = evaluate(phi.child(0), y, length);
    const BoundSignals b = evaluate(phi.child(1), y, length);
    const bool is_and = phi.kind() == Formula::Kind::And;
    for (std::size_t i = 0; i < length; ++i) {
      a.lo[i] = is_and ? std::min(a.lo[i], b.lo[i]) : std::max(a.lo[i], b.lo[i]);
      a.hi[i] = is_and ? std::min(a.hi[i], b.hi[i]) : std::max(a.hi[i], b.hi[i]);
    }
    return a;
  }
  case Formula::Kind::Always:
  case Formula::Kind::Eventually: {
    const BoundSignals c = evaluate(phi.child(0), y, length);
    const IndexWindow window = index_window(phi.interval(), y.step());
    const Extremum mode = phi.kind() == Formula::Kind::Always ? Extremum::Min : Extremum::Max;
    return {window_signal(c.lo, window, mode), window_signal(c.hi, window, mode)};
  }
  case Formula::Kind::Until: {
    const BoundSignals a = evaluate(phi.child(0), y, length);
    const BoundSignals b = evaluate(phi.child(1), y, length);
    const IndexWindow window = index_window(phi.interval(), y.step());
    return {until_signal(a.lo, b.lo, window), until_signal(a.hi, b.hi, window)};
  }
  }
  return {};
}

} // namespace

std::vector<double> sliding_window_extrema(std::span<const double> values, std::size_t lo, std::size_t hi,
                                           Extremum mode) {
  if (values.empty()) {
    throw Error("sliding_window_extrema on an empty array");
  }
  if (lo > hi) {
    throw Error(fmt::format("sliding window [{}, {}] has lo > hi", lo, hi));
  }
  const std::size_t n = values.size();
  const auto better = [mode](double a, double b) { return mode == Extremum::Min ? a <= b : a >= b; };
  std::vector<double> out(n, mode == Extremum::Min ? kInfinity : -kInfinity);
  std::deque<std::size_t> candidates;
  std::size_t next = lo;
  for (std::size_t i = 0; i < n; ++i) {
    if (i + lo >= n) {
      break;
    }
    const std::size_t last = std::min(i + hi, n - 1);
    for (; next <= last; ++next) {
      while (!candidates.empty() && better(values[next], values[candidates.back()])) {
        candidates.pop_back();
      }
      candidates.push_back(next);
    }
    while (candidates.front() < i + lo) {
      candidates.pop_front();
    }
    out[i] = values[candidates.front()];
  }
  return out;
}

IndexWindow index_window(const Interval &interval, double step) {
  const auto first = static_cast<std::size_t>(std::ceil(interval.lo / step - kIndexSlack));
  const auto last = static_cast<std::size_t>(std::floor(interval.hi / step + kIndexSlack));
  return {first, last};
}

std::size_t horizon_samples(const Formula &phi, double step) {
  switch (phi.kind()) {
  case Formula::Kind::Atom:
    return 0;
  case Formula::Kind::Not:
    return horizon_samples(phi.child(0), step);
  case Formula::Kind::And:
  case Formula::Kind::Or:
    return std::max(horizon_samples(phi.child(0), step), horizon_samples(phi.child(1), step));
  case Formula::Kind::Always:
  case Formula::Kind::Eventually:
    return index_window(phi.interval(), step).last + horizon_samples(phi.child(0), step);
  case Formula::Kind::Until:
    return index_window(phi.interval(), step).last +
           std::max(horizon_samples(phi.child(0), step), horizon_samples(phi.child(1), step));
  }
  return 0;
}

double rho(const Formula &phi, const Trace &y, double t) {
  if (y.size() == 0) {
    throw Error("robustness of an empty trace");
  }
  if (t < 0.0 || t > y.length() + y.step() * kIndexSlack) {
    throw Error(fmt::format("robustness time {} outside trace range [0, {}]", t, y.length()));
  }
  const std::size_t start = sample_index(t, y.step());
  const std::size_t needed = start + horizon_samples(phi, y.step());
  if (needed >= y.size()) {
    throw Error(fmt::format("trace of length {} too short for formula at t = {} (needs {})", y.length(), t,
                            static_cast<double>(needed) * y.step()));
  }
  return evaluate(phi, y, y.size()).lo[start];
}

std::vector<double> robustness_signal(const Formula &phi, const Trace &y) {
  return evaluate(phi, y, y.size()).lo;
}

RobustnessInterval rho_bounds(const Formula &phi, const Trace &y) {
  if (y.size() == 0) {
    throw Error("robustness bounds of an empty trace");
  }
  const std::size_t length = std::max(y.size(), horizon_samples(phi, y.step()) + 1);
  const BoundSignals s = evaluate(phi, y, length);
  return {s.lo[0], s.hi[0]};
}

} // namespace falsify
