#pragma once

// Incremental-conductance MPPT controllers.
//
// Both controllers act on the duty ratio of the converter and see only the
// sampled terminal voltage and current. The slope quantity is
//
//   raw:        s = dI/dV + I/V                (siemens)
//   normalized: s = 1 + (V/I) dI/dV            (dimensionless, = (dP/dV) / I)
//
// with dI/dV approximated by the secant between consecutive samples. s > 0
// left of the maximum power point, s < 0 right of it.

#include <optional>
#include <string_view>

namespace mppt {

enum class ControllerKind { Conventional, RevisedFixedBound, RevisedAdaptiveBound };

std::string_view to_string(ControllerKind kind);
std::optional<ControllerKind> parse_controller_kind(std::string_view name);

struct Measurement {
  double v = 0.0;
  double i = 0.0;
};

struct SlopeThresholds {
  double dv = 1e-9;  // V, below this the voltage difference is treated as zero
  double di = 1e-9;  // A, same for current
  double cap = 1e6;  // |s| is clipped to this
};

struct ControllerParams {
  double delta_d_nominal = 0.001;   // initial and post-MPP step
  double delta_d_max_0 = 0.01;      // initial step upper bound
  double delta_d_max_floor = 1e-4;  // adaptive bound never shrinks below this
  double delta_d_floor = 1e-6;      // smallest step, also the size of the start-up probe
  double epsilon = 5e-4;            // MPP test |s| <= epsilon, in the units of the chosen slope mode
  double acc = 1.2;
  double deacc = 0.8;
  bool adaptive_upper_bound = true;
  bool slope_normalization = true;
  int dv_dd_sign = -1;  // sign of dV/dd for the converter in use
  double d_min = 0.05;
  double d_max = 0.95;
  SlopeThresholds thresholds;

  void validate() const;
};

struct ControllerState {
  double d = 0.5;
  double delta_d = 0.0;      // adapted step size
  double delta_d_max = 0.0;  // current upper bound on the step
  std::optional<Measurement> prev;
  std::optional<int> prev_slope_sign;  // -1, 0 (held at MPP) or +1; unset before the first slope
  std::optional<double> prev_slope;
  bool at_mpp = false;
};

enum class Action { MovedLeft, MovedRight, HeldAtMpp };

std::string_view to_string(Action action);

struct StepOutcome {
  ControllerState new_state;
  Action action = Action::HeldAtMpp;
  double slope_term = 0.0;  // NaN on the start-up probe
  double duty_step = 0.0;   // signed change of d actually applied
};

ControllerState initial_state(const ControllerParams& params, double d0);

/// Slope quantity from two consecutive samples.
///
/// A sample with I <= 0 sits at or beyond open circuit, where dP/dV = V dI/dV < 0, and returns -cap.
/// When |dV| is below threshold, or dV and dI share a sign (impossible on a fixed curve), the sign
/// comes from dI (irradiance moved the curve); the magnitude is dI/I (normalized) or dI/V (raw). When dI is negligible too, the
/// previous slope is reused; without one, DegenerateSampleError.
double slope_term(const Measurement& meas, const Measurement& prev, bool normalize,
                  std::optional<double> prev_slope = std::nullopt, const SlopeThresholds& thresholds = {});

/// Fixed-step incremental conductance: moves d by delta_d_nominal toward the MPP every step, holding
/// only when the slope is exactly zero.
StepOutcome conventional_step(const ControllerState& state, const Measurement& meas, const ControllerParams& params);

/// Adaptive-step incremental conductance.
///
///  1. |s| <= epsilon: hold d, reset delta_d and delta_d_max to their initial values.
///  2. F = acc if the slope sign repeats, deacc if it flipped, 1 with no sign history.
///  3. With an adaptive bound, a sign flip also scales delta_d_max by deacc (not below its floor).
///  4. The duty moves by clamp(delta_d * F * |s|, delta_d_floor, delta_d_max) toward the MPP,
///     and delta_d becomes clamp(delta_d * F, delta_d_floor, delta_d_max).
StepOutcome revised_step(const ControllerState& state, const Measurement& meas, const ControllerParams& params);

/// A controller of a given kind with its own state. Not thread-safe; one caller per instance.
class Controller {
 public:
  Controller(ControllerKind kind, ControllerParams params, double initial_duty);

  StepOutcome step(const Measurement& meas);

  ControllerKind kind() const { return kind_; }
  const ControllerParams& params() const { return params_; }
  const ControllerState& state() const { return state_; }

 private:
  ControllerKind kind_;
  ControllerParams params_;
  ControllerState state_;
};

}  // namespace mppt
