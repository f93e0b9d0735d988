#include "falsify/signal.hpp"

#include "falsify/error.hpp"

#include <fmt/format.h>

#include <cmath>
#include <sstream>

namespace falsify {

namespace {

constexpr double kRelativeTimeSlack = 1e-9;

double parse_number(const std::string &field, std::size_t line) {
  try {
    std::size_t used = 0;
    double value = std::stod(field, &used);
    while (used < field.size() && std::isspace(static_cast<unsigned char>(field[used]))) {
      ++used;
    }
    if (used != field.size()) {
      throw ParseError(fmt::format("trailing characters in number '{}'", field), line, 1);
    }
    return value;
  } catch (const std::logic_error &) {
    throw ParseError(fmt::format("expected a number, got '{}'", field), line, 1);
  }
}

std::vector<std::string> split_commas(const std::string &line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) {
    fields.push_back(field);
  }
  if (!line.empty() && line.back() == ',') {
    fields.emplace_back();
  }
  return fields;
}

} // namespace

InputSignal::InputSignal(std::size_t dimension) : dimension_(dimension) {
  if (dimension == 0) {
    throw Error("input signal dimension must be positive");
  }
}

InputSignal::InputSignal(std::size_t dimension, std::vector<Segment> segments) : InputSignal(dimension) {
  for (auto &segment : segments) {
    append(std::move(segment));
  }
}

double InputSignal::length() const {
  double total = 0.0;
  for (const auto &segment : segments_) {
    total += segment.duration;
  }
  return total;
}

void InputSignal::append(Segment segment) {
  if (!(segment.duration > 0.0) || !std::isfinite(segment.duration)) {
    throw Error(fmt::format("segment duration must be positive and finite, got {}", segment.duration));
  }
  if (segment.values.size() != dimension_) {
    throw Error(fmt::format("segment has {} values, signal dimension is {}", segment.values.size(), dimension_));
  }
  segments_.push_back(std::move(segment));
}

std::vector<double> InputSignal::value_at(double t) const {
  if (segments_.empty()) {
    throw Error("value_at on an empty signal");
  }
  const double total = length();
  if (t < 0.0 || t > total * (1.0 + kRelativeTimeSlack)) {
    throw Error(fmt::format("time {} outside signal range [0, {}]", t, total));
  }
  double start = 0.0;
  for (const auto &segment : segments_) {
    const double end = start + segment.duration;
    if (t < end) {
      return segment.values;
    }
    start = end;
  }
  return segments_.back().values;
}

InputSignal concat(const InputSignal &a, const InputSignal &b) {
  if (a.dimension() != b.dimension()) {
    throw Error(fmt::format("cannot concatenate signals of dimension {} and {}", a.dimension(), b.dimension()));
  }
  InputSignal result = a;
  for (const auto &segment : b.segments()) {
    result.append(segment);
  }
  return result;
}

Trace::Trace(std::size_t dimension, double step) : dimension_(dimension), step_(step) {
  if (dimension == 0) {
    throw Error("trace dimension must be positive");
  }
  if (!(step > 0.0) || !std::isfinite(step)) {
    throw Error(fmt::format("trace step must be positive and finite, got {}", step));
  }
}

Trace::Trace(std::size_t dimension, double step, std::vector<double> row_major) : Trace(dimension, step) {
  if (row_major.size() % dimension != 0) {
    throw Error("trace data is not a whole number of rows");
  }
  data_ = std::move(row_major);
}

double Trace::length() const {
  const std::size_t n = size();
  return n == 0 ? 0.0 : static_cast<double>(n - 1) * step_;
}

void Trace::push_back(std::span<const double> row) {
  if (row.size() != dimension_) {
    throw Error(fmt::format("trace row has {} values, trace dimension is {}", row.size(), dimension_));
  }
  data_.insert(data_.end(), row.begin(), row.end());
}

std::span<const double> Trace::row(std::size_t i) const {
  return std::span<const double>(data_).subspan(i * dimension_, dimension_);
}

std::size_t sample_index(double t, double step) {
  return static_cast<std::size_t>(std::floor(t / step + kRelativeTimeSlack));
}

Trace prefix(const Trace &y, double t) {
  if (y.size() == 0) {
    throw Error("prefix of an empty trace");
  }
  if (t < 0.0 || t > y.length() + y.step() * kRelativeTimeSlack) {
    throw Error(fmt::format("prefix time {} outside trace range [0, {}]", t, y.length()));
  }
  const std::size_t keep = std::min(sample_index(t, y.step()) + 1, y.size());
  std::vector<double> data(y.data().begin(), y.data().begin() + static_cast<std::ptrdiff_t>(keep * y.dimension()));
  return Trace(y.dimension(), y.step(), std::move(data));
}

std::string trace_to_csv(const Trace &y, const std::vector<std::string> &names) {
  if (names.size() != y.dimension()) {
    throw Error(fmt::format("{} column names for a trace of dimension {}", names.size(), y.dimension()));
  }
  std::string out = "time";
  for (const auto &name : names) {
    out += ',';
    out += name;
  }
  out += '\n';
  for (std::size_t i = 0; i < y.size(); ++i) {
    out += fmt::format("{}", static_cast<double>(i) * y.step());
    for (double v : y.row(i)) {
      out += fmt::format(",{}", v);
    }
    out += '\n';
  }
  return out;
}

Trace trace_from_csv(const std::string &text, std::vector<std::string> *names) {
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::string> header;
  std::vector<double> times;
  std::vector<double> data;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') {
      line.pop_back();
    }
    if (line.empty()) {
      continue;
    }
    auto fields = split_commas(line);
    if (header.empty()) {
      if (fields.size() < 2 || fields.front() != "time") {
        throw ParseError("trace header must be 'time,<name>,...'", line_no, 1);
      }
      header.assign(fields.begin() + 1, fields.end());
      continue;
    }
    if (fields.size() != header.size() + 1) {
      throw ParseError(fmt::format("expected {} columns, found {}", header.size() + 1, fields.size()), line_no, 1);
    }
    times.push_back(parse_number(fields[0], line_no));
    for (std::size_t j = 1; j < fields.size(); ++j) {
      data.push_back(parse_number(fields[j], line_no));
    }
  }
  if (header.empty() || times.empty()) {
    throw ParseError("trace has no samples");
  }
  if (times.front() != 0.0) {
    throw ParseError("trace must start at time 0", 2, 1);
  }
  const double step = times.size() > 1 ? times[1] - times[0] : 1.0;
  for (std::size_t i = 1; i < times.size(); ++i) {
    const double expected = static_cast<double>(i) * step;
    if (std::abs(times[i] - expected) > 1e-6 * step) {
      throw ParseError(fmt::format("non-uniform sampling at time {}", times[i]));
    }
  }
  if (names != nullptr) {
    *names = header;
  }
  return Trace(header.size(), step, std::move(data));
}

} // namespace falsify
