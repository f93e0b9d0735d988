#pragma once

#include "falsify/signal.hpp"
#include "falsify/stl.hpp"

#include <cstddef>
#include <limits>
#include <span>
#include <vector>

namespace falsify {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// Bounds on the robustness of every extension of a trace prefix.
struct RobustnessInterval {
  double lo = -kInfinity;
  double hi = kInfinity;

  bool is_point() const { return lo == hi; }
  bool operator==(const RobustnessInterval &) const = default;
};

enum class Extremum { Min, Max };

/// out[i] = extremum of values[i + lo .. i + hi], clipped to the end of the
/// array; a window that starts past the end yields +inf (Min) or -inf (Max).
/// Amortized O(1) per element using a monotone deque.
std::vector<double> sliding_window_extrema(std::span<const double> values, std::size_t lo, std::size_t hi,
                                           Extremum mode);

/// Sample-index range [first, last] covered by an interval at step delta.
/// first > last when no sample instant falls in the interval.
struct IndexWindow {
  std::size_t first;
  std::size_t last;
};
IndexWindow index_window(const Interval &interval, double step);

/// Number of samples past time 0 the robustness at time 0 depends on.
std::size_t horizon_samples(const Formula &phi, double step);

/// Quantitative semantics evaluated on the sample grid. Throws when the
/// trace is too short for the formula at time t; use rho_bounds instead.
double rho(const Formula &phi, const Trace &y, double t = 0.0);

/// Robustness at every sample index of a trace long enough for all of them;
/// entries whose windows run off the end treat the missing samples as absent.
std::vector<double> robustness_signal(const Formula &phi, const Trace &y);

/// Sound lower/upper bounds on rho(phi, y . y') over all suffixes y'.
RobustnessInterval rho_bounds(const Formula &phi, const Trace &y);

} // namespace falsify
