#include "falsify/models.hpp"

#include "falsify/error.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>

namespace falsify {

namespace {

constexpr double kSampleSlack = 1e-9;
constexpr int kBisectionSteps = 200;
constexpr int kMaxEventsPerStep = 64;

// Walks an input signal on the internal integration grid, splitting steps at
// segment boundaries so the input is constant over every piece.
template <class State, class Advance, class Emit>
Trace integrate(const InputSignal &u, double step, int substeps, std::size_t outputs, State state, Advance advance,
                Emit emit) {
  if (u.empty()) {
    throw SimulationError("cannot simulate an empty input");
  }
  if (substeps < 1) {
    throw SimulationError("need at least one integration step per sample");
  }
  const std::size_t samples = sample_count(u.length(), step);
  const double h = step / substeps;

  std::vector<double> segment_end;
  double acc = 0.0;
  for (const auto &segment : u.segments()) {
    acc += segment.duration;
    segment_end.push_back(acc);
  }
  const double boundary_slack = 1e-12 * std::max(1.0, acc);

  Trace y(outputs, step);
  std::vector<double> row(outputs);
  emit(state, row);
  y.push_back(row);

  std::size_t cursor = 0;
  const auto values_on = [&](double a, double b) -> const std::vector<double> & {
    const double mid = 0.5 * (a + b);
    while (cursor + 1 < segment_end.size() && mid >= segment_end[cursor]) {
      ++cursor;
    }
    return u.segments()[cursor].values;
  };

  const std::size_t total_steps = (samples - 1) * static_cast<std::size_t>(substeps);
  for (std::size_t k = 0; k < total_steps; ++k) {
    const double a = static_cast<double>(k) * h;
    const double b = static_cast<double>(k + 1) * h;
    double piece_start = a;
    for (std::size_t s = cursor; s < segment_end.size(); ++s) {
      const double edge = segment_end[s];
      if (edge <= piece_start + boundary_slack) {
        continue;
      }
      if (edge >= b - boundary_slack) {
        break;
      }
      advance(state, values_on(piece_start, edge), edge - piece_start, piece_start);
      piece_start = edge;
    }
    advance(state, values_on(piece_start, b), b - piece_start, piece_start);
    if ((k + 1) % static_cast<std::size_t>(substeps) == 0) {
      emit(state, row);
      for (double v : row) {
        if (!std::isfinite(v)) {
          throw SimulationError("non-finite model state", b);
        }
      }
      y.push_back(row);
    }
  }
  return y;
}

// Smallest h in (0, limit] where x(h) reaches target, assuming x(0) and
// x(limit) lie on opposite sides.
double locate_crossing(const std::function<double(double)> &rate, double x, double target, double limit) {
  const bool rising = x < target;
  double lo = 0.0;
  double hi = limit;
  for (int i = 0; i < kBisectionSteps && hi - lo > 0.0; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) {
      break;
    }
    const double xm = rk4_step(rate, x, mid);
    if (rising ? xm < target : xm > target) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return hi;
}

} // namespace

std::size_t sample_count(double length, double step) {
  if (!(step > 0.0)) {
    throw SimulationError(fmt::format("sampling step must be positive, got {}", step));
  }
  return static_cast<std::size_t>(std::floor(length / step + kSampleSlack)) + 1;
}

double rk4_step(const std::function<double(double)> &rate, double x, double h) {
  const double k1 = rate(x);
  const double k2 = rate(x + 0.5 * h * k1);
  const double k3 = rate(x + 0.5 * h * k2);
  const double k4 = rate(x + h * k3);
  return x + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

int SurrogateTransmission::gear(double speed) const {
  int g = 1;
  for (double threshold : parameters_.thresholds) {
    if (threshold < speed) {
      ++g;
    }
  }
  return std::min(g, 4);
}

double SurrogateTransmission::acceleration(int gear, double speed, double throttle, double brake) const {
  return parameters_.gains[gear - 1] * (throttle / 100.0) - parameters_.brake_gain * (brake / 100.0) -
         parameters_.drag * speed;
}

double SurrogateTransmission::advance(double speed, double throttle, double brake, double dt) const {
  const auto &thresholds = parameters_.thresholds;
  double v = speed;
  double remaining = dt;
  for (int event = 0; remaining > 0.0; ++event) {
    int g = gear(v);
    if (g <= 3 && v == thresholds[g - 1]) {
      // On a shift threshold: leave upward, leave downward, or slide along it.
      if (acceleration(g + 1, v, throttle, brake) > 0.0) {
        ++g;
      } else if (!(acceleration(g, v, throttle, brake) < 0.0)) {
        return v;
      }
    }
    if (v <= 0.0 && !(acceleration(1, 0.0, throttle, brake) > 0.0)) {
      return 0.0;
    }
    const double region_lo = g == 1 ? 0.0 : thresholds[g - 2];
    const double region_hi = g == 4 ? std::numeric_limits<double>::infinity() : thresholds[g - 1];
    const std::function<double(double)> rate = [&, g](double x) { return acceleration(g, x, throttle, brake); };
    const double next = rk4_step(rate, v, remaining);
    if (event >= kMaxEventsPerStep || (next >= region_lo && next <= region_hi)) {
      return std::max(next, 0.0);
    }
    const double target = next > region_hi ? region_hi : region_lo;
    const double reach = locate_crossing(rate, v, target, remaining);
    v = target;
    remaining -= reach;
  }
  return v;
}

Trace SurrogateTransmission::simulate(const InputSignal &u, double step) { return simulate(u, step, kSubstepsPerSample); }

Trace SurrogateTransmission::simulate(const InputSignal &u, double step, int substeps) const {
  if (u.dimension() != inputs_.size()) {
    throw SimulationError(fmt::format("transmission expects {} inputs, got {}", inputs_.size(), u.dimension()));
  }
  return integrate(
      u, step, substeps, outputs_.size(), 0.0,
      [this](double &v, const std::vector<double> &in, double dt, double) { v = advance(v, in[0], in[1], dt); },
      [this](const double &v, std::vector<double> &row) {
        const int g = gear(v);
        row[0] = v;
        row[1] = parameters_.ratios[g - 1] * v;
        row[2] = static_cast<double>(g);
      });
}

SurrogateThermostat::SurrogateThermostat(bool initial_temperature_input) {
  inputs_.push_back("power");
  if (initial_temperature_input) {
    inputs_.push_back("x0");
  }
}

double SurrogateThermostat::rate(Mode mode, double x, double power) {
  const double target = mode == Mode::Heat ? 30.0 : 10.0;
  return -0.1 * (x - target) + 2.0 * power;
}

Trace SurrogateThermostat::simulate(const InputSignal &u, double step) { return simulate(u, step, kSubstepsPerSample); }

Trace SurrogateThermostat::simulate(const InputSignal &u, double step, int substeps) const {
  if (u.dimension() != inputs_.size()) {
    throw SimulationError(fmt::format("thermostat expects {} inputs, got {}", inputs_.size(), u.dimension()));
  }
  if (u.empty()) {
    throw SimulationError("cannot simulate an empty input");
  }
  struct State {
    double x;
    Mode mode;
  };
  const double x0 = inputs_.size() > 1 ? u.segments().front().values[1] : kInitialTemperature;
  State initial{x0, x0 >= kCoolAt ? Mode::Cool : Mode::Heat};
  return integrate(
      u, step, substeps, outputs_.size(), initial,
      [](State &s, const std::vector<double> &in, double dt, double) {
        const double power = in[0];
        double remaining = dt;
        for (int event = 0; remaining > 0.0; ++event) {
          if (s.mode == Mode::Heat && s.x >= kCoolAt) {
            s.mode = Mode::Cool;
          } else if (s.mode == Mode::Cool && s.x <= kHeatAt) {
            s.mode = Mode::Heat;
          }
          const Mode mode = s.mode;
          const std::function<double(double)> f = [mode, power](double x) { return rate(mode, x, power); };
          const double next = rk4_step(f, s.x, remaining);
          const bool crosses = mode == Mode::Heat ? next > kCoolAt : next < kHeatAt;
          if (!crosses || event >= kMaxEventsPerStep) {
            s.x = next;
            return;
          }
          const double target = mode == Mode::Heat ? kCoolAt : kHeatAt;
          remaining -= locate_crossing(f, s.x, target, remaining);
          s.x = target;
        }
      },
      [](const State &s, std::vector<double> &row) {
        row[0] = s.x;
        row[1] = s.mode == Mode::Heat ? 1.0 : 0.0;
      });
}

std::unique_ptr<SystemModel> make_builtin_model(const std::string &name, const std::vector<std::string> &parameters) {
  if (name == "transmission") {
    if (!parameters.empty()) {
      throw ValidationError(fmt::format("model 'transmission' has no parameter '{}'", parameters.front()));
    }
    return std::make_unique<SurrogateTransmission>();
  }
  if (name == "thermostat") {
    if (parameters.size() > 1 || (parameters.size() == 1 && parameters.front() != "x0")) {
      throw ValidationError("model 'thermostat' accepts only the parameter 'x0'");
    }
    return std::make_unique<SurrogateThermostat>(!parameters.empty());
  }
  throw ValidationError(fmt::format("unknown built-in model '{}'", name));
}

} // namespace falsify
