#include "mppt/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include <fmt/core.h>

namespace mppt {

void SimConfig::validate() const {
  if (!(control_interval > 0.0)) throw InvalidArgument("simulation.control_interval must be > 0");
  // Allow for k * dt rounding when duration is an exact multiple of the interval.
  if (!(duration >= control_interval * (1.0 - 1e-12))) {
    throw InvalidArgument("simulation.duration must be >= simulation.control_interval");
  }
  if (initial_duty && !(*initial_duty > 0.0 && *initial_duty < 1.0)) {
    throw InvalidArgument("simulation.initial_duty must lie in (0, 1)");
  }
  if (!(initial_voltage_fraction > 0.0)) throw InvalidArgument("simulation.initial_voltage_fraction must be > 0");
  if (!(noise.v_amplitude >= 0.0) || !(noise.i_amplitude >= 0.0)) {
    throw InvalidArgument("simulation.noise amplitudes must be >= 0");
  }
}

std::size_t SimConfig::step_count() const {
  return static_cast<std::size_t>(std::max(1.0, std::floor(duration / control_interval + 1e-9)));
}

double auto_initial_duty(const BuckBoostModel& converter, const MppResult& mpp, double fraction) {
  const double v_target = mpp.v_mpp > 0.0 ? fraction * mpp.v_mpp : converter.v_bus;
  return duty_for_voltage(converter, v_target);
}

std::vector<SimRecord> run_simulation(const OracleCache& oracle, const BuckBoostModel& converter, ControllerKind kind,
                                      const ControllerParams& params, const EnvProfile& profile,
                                      const SimConfig& cfg) {
  converter.validate();
  cfg.validate();
  const PvArray& array = oracle.array();

  ControllerParams ctl_params = params;
  ctl_params.d_min = converter.d_min;
  ctl_params.d_max = converter.d_max;
  ctl_params.dv_dd_sign = BuckBoostModel::dv_dd_sign;

  const double d0 = cfg.initial_duty
                        ? *cfg.initial_duty
                        : auto_initial_duty(converter, oracle.get(profile.at(0.0)), cfg.initial_voltage_fraction);
  Controller controller(kind, ctl_params, d0);

  std::mt19937_64 rng(cfg.noise.seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  const bool noisy = cfg.noise.v_amplitude > 0.0 || cfg.noise.i_amplitude > 0.0;

  const std::size_t steps = cfg.step_count();
  std::vector<SimRecord> trace;
  trace.reserve(steps);
  for (std::size_t k = 0; k < steps; ++k) {
    const double t = static_cast<double>(k) * cfg.control_interval;
    const EnvCondition env = profile.at(t);
    try {
      const MppResult mpp = oracle.get(env);
      const VoltageCommand cmd = terminal_voltage(converter, controller.state().d);

      // The converter cannot pull the panel above open circuit; there it sits at (V_oc, 0).
      IVPoint op{mpp.v_oc, 0.0};
      if (cmd.v < mpp.v_oc) {
        op = array.operating_point(env, cmd.v);
        op.i = std::max(op.i, 0.0);
      }

      Measurement meas{op.v, op.i};
      if (noisy) {
        meas.v = std::max(0.0, meas.v + cfg.noise.v_amplitude * unit(rng));
        meas.i = std::max(0.0, meas.i + cfg.noise.i_amplitude * unit(rng));
      }
      const StepOutcome outcome = controller.step(meas);

      SimRecord rec;
      rec.t = t;
      rec.g = env.g;
      rec.temp = env.t;
      rec.v = op.v;
      rec.i = op.i;
      rec.p = op.p();
      rec.d = cmd.duty;
      rec.delta_d = outcome.new_state.delta_d;
      rec.delta_d_max = outcome.new_state.delta_d_max;
      rec.p_mpp = mpp.p_mpp();
      rec.v_mpp = mpp.v_mpp;
      rec.p_deviation = rec.p_mpp - rec.p;
      rec.action = outcome.action;
      rec.slope_term = outcome.slope_term;
      trace.push_back(rec);
    } catch (const SolverError& e) {
      throw SimulationError(fmt::format("solver failed at t = {} s: {}", t, e.what()), t, std::move(trace));
    } catch (const NumericRangeError& e) {
      throw SimulationError(fmt::format("numeric range error at t = {} s: {}", t, e.what()), t, std::move(trace));
    }
  }
  return trace;
}

std::vector<SimRecord> run_simulation(const PvArray& array, const BuckBoostModel& converter, ControllerKind kind,
                                      const ControllerParams& params, const EnvProfile& profile,
                                      const SimConfig& cfg) {
  const OracleCache oracle(array);
  return run_simulation(oracle, converter, kind, params, profile, cfg);
}

}  // namespace mppt
