#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace falsify {

/// A constant input segment (duration, value vector).
struct Segment {
  double duration = 0.0;
  std::vector<double> values;

  bool operator==(const Segment &) const = default;
};

/// Piecewise-constant n-dimensional input signal built from segments.
///
/// Segment intervals are right-open, except that the final instant of the
/// signal takes the value of the last segment.
class InputSignal {
public:
  explicit InputSignal(std::size_t dimension);
  InputSignal(std::size_t dimension, std::vector<Segment> segments);

  std::size_t dimension() const { return dimension_; }
  const std::vector<Segment> &segments() const { return segments_; }
  bool empty() const { return segments_.empty(); }
  double length() const;

  void append(Segment segment);
  std::vector<double> value_at(double t) const;

  bool operator==(const InputSignal &) const = default;

private:
  std::size_t dimension_;
  std::vector<Segment> segments_;
};

InputSignal concat(const InputSignal &a, const InputSignal &b);

/// Uniformly sampled m-dimensional output trace. Sample i is taken at time
/// i * step and holds until the next sample.
class Trace {
public:
  Trace(std::size_t dimension, double step);
  Trace(std::size_t dimension, double step, std::vector<double> row_major);

  std::size_t dimension() const { return dimension_; }
  double step() const { return step_; }
  std::size_t size() const { return dimension_ == 0 ? 0 : data_.size() / dimension_; }
  double length() const;

  void push_back(std::span<const double> row);
  std::span<const double> row(std::size_t i) const;
  double at(std::size_t i, std::size_t column) const { return data_[i * dimension_ + column]; }
  const std::vector<double> &data() const { return data_; }

  bool operator==(const Trace &) const = default;

private:
  std::size_t dimension_;
  double step_;
  std::vector<double> data_;
};

/// Index of the sample covering time t, tolerant of rounding in t / step.
std::size_t sample_index(double t, double step);

Trace prefix(const Trace &y, double t);

/// Writes `time,<names...>` followed by one row per sample.
std::string trace_to_csv(const Trace &y, const std::vector<std::string> &names);

/// Parses the CSV written by trace_to_csv. The sampling step is inferred
/// from the first two time stamps and checked for uniformity.
Trace trace_from_csv(const std::string &text, std::vector<std::string> *names = nullptr);

} // namespace falsify
