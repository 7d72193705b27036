#pragma once

// Closed-loop MPPT simulation at the control cadence: profile -> array -> converter -> controller.

#include <cstdint>
#include <optional>
#include <vector>

#include "mppt/controllers.hpp"
#include "mppt/converter.hpp"
#include "mppt/error.hpp"
#include "mppt/mpp_oracle.hpp"
#include "mppt/profile.hpp"
#include "mppt/pv_model.hpp"

namespace mppt {

/// Additive uniform noise on the sampled (V, I). Zero amplitudes disable it.
struct NoiseSettings {
  double v_amplitude = 0.0;
  double i_amplitude = 0.0;
  std::uint64_t seed = 1;
};

struct SimConfig {
  double control_interval = 0.010;
  double duration = 5.0;
  std::optional<double> initial_duty;     // unset: start at initial_voltage_fraction of the first MPP voltage
  double initial_voltage_fraction = 0.9;
  NoiseSettings noise;

  void validate() const;
  std::size_t step_count() const;
};

struct SimRecord {
  double t = 0.0;
  double g = 0.0;
  double temp = 0.0;  // K
  double v = 0.0;
  double i = 0.0;
  double p = 0.0;
  double d = 0.0;     // duty in effect at t
  double delta_d = 0.0;
  double delta_d_max = 0.0;
  double p_mpp = 0.0;
  double v_mpp = 0.0;
  double p_deviation = 0.0;
  Action action = Action::HeldAtMpp;
  double slope_term = 0.0;
};

class SimulationError : public Error {
 public:
  SimulationError(const std::string& what, double t, std::vector<SimRecord> partial)
      : Error(what), t_(t), partial_(std::move(partial)) {}

  double time() const noexcept { return t_; }
  const std::vector<SimRecord>& partial_trace() const noexcept { return partial_; }

 private:
  double t_;
  std::vector<SimRecord> partial_;
};

/// Duty that places the array at `fraction` of the MPP voltage for env.
double auto_initial_duty(const BuckBoostModel& converter, const MppResult& mpp, double fraction);

/// Runs one simulation. Oracle values come from `oracle` (which also owns the array model).
/// Deterministic for a given input. Throws SimulationError carrying the partial trace on solver failure.
std::vector<SimRecord> run_simulation(const OracleCache& oracle, const BuckBoostModel& converter, ControllerKind kind,
                                      const ControllerParams& params, const EnvProfile& profile, const SimConfig& cfg);

std::vector<SimRecord> run_simulation(const PvArray& array, const BuckBoostModel& converter, ControllerKind kind,
                                      const ControllerParams& params, const EnvProfile& profile, const SimConfig& cfg);

}  // namespace mppt
