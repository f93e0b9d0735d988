#pragma once

#include "falsify/signal.hpp"

#include <cstddef>
#include <functional>
#include <istream>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace falsify {

/// Deterministic black-box system: piecewise-constant input in, sampled
/// trace of the same length out.
class SystemModel {
public:
  virtual ~SystemModel() = default;

  virtual const std::vector<std::string> &input_names() const = 0;
  virtual const std::vector<std::string> &output_names() const = 0;

  /// Outputs that only take integer values.
  virtual std::vector<std::string> discrete_outputs() const { return {}; }

  std::size_t input_dimension() const { return input_names().size(); }
  std::size_t output_dimension() const { return output_names().size(); }

  virtual Trace simulate(const InputSignal &u, double step) = 0;
};

/// Number of samples a trace of an input of this length has.
std::size_t sample_count(double length, double step);

/// Fixed-step RK4 for a scalar autonomous ODE.
double rk4_step(const std::function<double(double)> &rate, double x, double h);

/// Internal integration steps per output sample.
inline constexpr int kSubstepsPerSample = 4;

/// Speed-driven automatic transmission with inputs (throttle, brake), both
/// in percent, and outputs (v, omega, g). Gear is a memoryless function of
/// speed; gear changes and the v >= 0 wall are located exactly inside a step.
class SurrogateTransmission : public SystemModel {
public:
  struct Parameters {
    double gains[4] = {4.0, 3.2, 2.6, 2.0};
    double brake_gain = 6.0;
    double drag = 0.02;
    double thresholds[3] = {15.0, 30.0, 45.0};
    double ratios[4] = {120.0, 75.0, 50.0, 40.0};
  };

  SurrogateTransmission() = default;
  explicit SurrogateTransmission(Parameters parameters) : parameters_(parameters) {}

  const std::vector<std::string> &input_names() const override { return inputs_; }
  const std::vector<std::string> &output_names() const override { return outputs_; }
  std::vector<std::string> discrete_outputs() const override { return {"g"}; }

  Trace simulate(const InputSignal &u, double step) override;

  /// Simulates with an explicit number of internal steps per sample.
  Trace simulate(const InputSignal &u, double step, int substeps) const;

  int gear(double speed) const;
  double acceleration(int gear, double speed, double throttle, double brake) const;

  /// Advances the speed by dt under constant pedal positions.
  double advance(double speed, double throttle, double brake, double dt) const;

private:
  Parameters parameters_;
  std::vector<std::string> inputs_{"throttle", "brake"};
  std::vector<std::string> outputs_{"v", "omega", "g"};
};

/// Two-mode thermostat with hysteresis. Input: heater power in [0, 1];
/// outputs: temperature x and mode (1 = heat, 0 = cool). The mode flips to
/// cool when x reaches 22 and back to heat when x falls to 18.
class SurrogateThermostat : public SystemModel {
public:
  enum class Mode { Heat, Cool };

  /// With `initial_temperature_input`, a second input `x0` sets x(0); it is
  /// read from the first segment.
  explicit SurrogateThermostat(bool initial_temperature_input = false);

  const std::vector<std::string> &input_names() const override { return inputs_; }
  const std::vector<std::string> &output_names() const override { return outputs_; }
  std::vector<std::string> discrete_outputs() const override { return {"mode"}; }

  Trace simulate(const InputSignal &u, double step) override;
  Trace simulate(const InputSignal &u, double step, int substeps) const;

  static constexpr double kInitialTemperature = 20.0;
  static constexpr double kHeatAt = 18.0;
  static constexpr double kCoolAt = 22.0;

  static double rate(Mode mode, double x, double power);

private:
  std::vector<std::string> inputs_;
  std::vector<std::string> outputs_{"x", "mode"};
};

/// Builds a built-in model by name. `parameters` lists constant inputs the
/// problem declares beyond the time-varying ones; unsupported names throw.
std::unique_ptr<SystemModel> make_builtin_model(const std::string &name,
                                                const std::vector<std::string> &parameters = {});

// Line protocol spoken with external simulators.
void write_request(std::ostream &out, const InputSignal &u, double step);
struct SimulationRequest {
  double step = 0.0;
  double horizon = 0.0;
  InputSignal input{1};
};
/// Returns nullopt on clean end of stream.
std::optional<SimulationRequest> read_request(std::istream &in);
void write_response(std::ostream &out, const Trace &y);
Trace read_response(std::istream &in, std::size_t outputs, double step);

/// Simulator running as a child process speaking the line protocol over
/// stdin/stdout. One process is started lazily and reused across calls.
class ExternalModel : public SystemModel {
public:
  ExternalModel(std::vector<std::string> command, std::vector<std::string> inputs, std::vector<std::string> outputs,
                std::vector<std::string> discrete = {});
  ~ExternalModel() override;
  ExternalModel(const ExternalModel &) = delete;
  ExternalModel &operator=(const ExternalModel &) = delete;

  const std::vector<std::string> &input_names() const override { return inputs_; }
  const std::vector<std::string> &output_names() const override { return outputs_; }
  std::vector<std::string> discrete_outputs() const override { return discrete_; }

  Trace simulate(const InputSignal &u, double step) override;

private:
  class Process;

  std::vector<std::string> command_;
  std::vector<std::string> inputs_;
  std::vector<std::string> outputs_;
  std::vector<std::string> discrete_;
  std::unique_ptr<Process> process_;
};

/// Forwards to another model and counts simulate calls.
class CountingModel : public SystemModel {
public:
  explicit CountingModel(SystemModel &inner) : inner_(inner) {}

  const std::vector<std::string> &input_names() const override { return inner_.input_names(); }
  const std::vector<std::string> &output_names() const override { return inner_.output_names(); }
  std::vector<std::string> discrete_outputs() const override { return inner_.discrete_outputs(); }

  Trace simulate(const InputSignal &u, double step) override {
    ++count_;
    return inner_.simulate(u, step);
  }

  std::size_t count() const { return count_; }

private:
  SystemModel &inner_;
  std::size_t count_ = 0;
};

} // namespace falsify
