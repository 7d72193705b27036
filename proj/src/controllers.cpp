#include "mppt/controllers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/core.h>

#include "mppt/error.hpp"

namespace mppt {

namespace {

int sign_of(double x) { return (x > 0.0) - (x < 0.0); }

void check_measurement(const Measurement& m) {
  if (!(m.v >= 0.0) || !std::isfinite(m.v) || !(m.i >= 0.0) || !std::isfinite(m.i)) {
    throw InvalidArgument(fmt::format("measurement must have v >= 0 and i >= 0, got ({}, {})", m.v, m.i));
  }
}

double apply_move(const ControllerParams& params, double d, int direction, double step) {
  return std::clamp(d + params.dv_dd_sign * direction * step, params.d_min, params.d_max);
}

Action action_for(int direction) { return direction > 0 ? Action::MovedRight : Action::MovedLeft; }

// First call: nothing to difference against yet, so nudge V upward and remember the sample.
StepOutcome probe(const ControllerState& state, const Measurement& meas, const ControllerParams& params,
                  double step) {
  StepOutcome out;
  out.new_state = state;
  out.new_state.d = apply_move(params, state.d, +1, step);
  out.new_state.prev = meas;
  out.new_state.at_mpp = false;
  out.action = Action::MovedRight;
  out.slope_term = std::numeric_limits<double>::quiet_NaN();
  out.duty_step = out.new_state.d - state.d;
  return out;
}

}  // namespace

std::string_view to_string(ControllerKind kind) {
  switch (kind) {
    case ControllerKind::Conventional: return "conventional";
    case ControllerKind::RevisedFixedBound: return "revised-fixed-bound";
    case ControllerKind::RevisedAdaptiveBound: return "revised-adaptive-bound";
  }
  return "unknown";
}

std::optional<ControllerKind> parse_controller_kind(std::string_view name) {
  for (auto kind : {ControllerKind::Conventional, ControllerKind::RevisedFixedBound,
                    ControllerKind::RevisedAdaptiveBound}) {
    if (to_string(kind) == name) return kind;
  }
  return std::nullopt;
}

std::string_view to_string(Action action) {
  switch (action) {
    case Action::MovedLeft: return "MovedLeft";
    case Action::MovedRight: return "MovedRight";
    case Action::HeldAtMpp: return "HeldAtMpp";
  }
  return "unknown";
}

void ControllerParams::validate() const {
  auto fail = [](const char* field, const char* rule) {
    throw InvalidArgument(fmt::format("controller.{} must satisfy {}", field, rule));
  };
  if (!(delta_d_nominal > 0.0 && delta_d_nominal <= delta_d_max_0)) fail("delta_d_nominal", "0 < delta_d_nominal <= delta_d_max_0");
  if (!(delta_d_max_0 < 1.0)) fail("delta_d_max_0", "< 1");
  if (!(delta_d_max_floor > 0.0 && delta_d_max_floor <= delta_d_max_0)) fail("delta_d_max_floor", "0 < delta_d_max_floor <= delta_d_max_0");
  if (!(delta_d_floor > 0.0 && delta_d_floor <= delta_d_max_floor && delta_d_floor <= delta_d_nominal)) {
    fail("delta_d_floor", "0 < delta_d_floor <= min(delta_d_max_floor, delta_d_nominal)");
  }
  if (!(epsilon > 0.0)) fail("epsilon", "> 0");
  if (!(acc > 1.0)) fail("acc", "> 1");
  if (!(deacc > 0.0 && deacc < 1.0)) fail("deacc", "0 < deacc < 1");
  if (dv_dd_sign != 1 && dv_dd_sign != -1) fail("dv_dd_sign", "+1 or -1");
  if (!(d_min > 0.0 && d_min < d_max && d_max < 1.0)) fail("d_min/d_max", "0 < d_min < d_max < 1");
  if (!(thresholds.dv > 0.0 && thresholds.di > 0.0 && thresholds.cap > 0.0)) fail("thresholds", "all > 0");
}

ControllerState initial_state(const ControllerParams& params, double d0) {
  ControllerState s;
  s.d = std::clamp(d0, params.d_min, params.d_max);
  s.delta_d = params.delta_d_nominal;
  s.delta_d_max = params.delta_d_max_0;
  return s;
}

double slope_term(const Measurement& meas, const Measurement& prev, bool normalize, std::optional<double> prev_slope,
                  const SlopeThresholds& thresholds) {
  const double cap = thresholds.cap;
  if (meas.i <= 0.0) return -cap;

  const double dv = meas.v - prev.v;
  const double di = meas.i - prev.i;
  double s;
  // A static I-V curve has dI/dV < 0. A flat-voltage sample, or one where V and I moved together,
  // means the curve itself moved; only the current change carries information.
  const bool curve_moved = std::abs(dv) < thresholds.dv || (std::abs(di) >= thresholds.di && dv * di > 0.0);
  if (curve_moved) {
    if (std::abs(di) < thresholds.di) {
      if (!prev_slope) throw DegenerateSampleError("slope_term: no change in V or I and no previous slope");
      return *prev_slope;
    }
    if (normalize) {
      s = di / meas.i;
    } else {
      s = meas.v > 0.0 ? di / meas.v : sign_of(di) * cap;
    }
  } else if (normalize) {
    s = 1.0 + (meas.v / meas.i) * (di / dv);
  } else {
    s = meas.v > 0.0 ? di / dv + meas.i / meas.v : cap;
  }
  return std::clamp(s, -cap, cap);
}

StepOutcome conventional_step(const ControllerState& state, const Measurement& meas, const ControllerParams& params) {
  check_measurement(meas);
  if (!state.prev) return probe(state, meas, params, params.delta_d_nominal);

  const double s = slope_term(meas, *state.prev, params.slope_normalization, state.prev_slope, params.thresholds);
  StepOutcome out;
  out.new_state = state;
  out.slope_term = s;
  out.new_state.prev = meas;
  out.new_state.prev_slope = s;
  out.new_state.prev_slope_sign = sign_of(s);
  out.new_state.delta_d = params.delta_d_nominal;
  out.new_state.delta_d_max = params.delta_d_max_0;

  const int direction = sign_of(s);
  if (direction == 0) {
    out.new_state.at_mpp = true;
    out.action = Action::HeldAtMpp;
    return out;
  }
  out.new_state.at_mpp = false;
  out.new_state.d = apply_move(params, state.d, direction, params.delta_d_nominal);
  out.duty_step = out.new_state.d - state.d;
  out.action = action_for(direction);
  return out;
}

StepOutcome revised_step(const ControllerState& state, const Measurement& meas, const ControllerParams& params) {
  check_measurement(meas);
  if (!state.prev) return probe(state, meas, params, params.delta_d_floor);

  const double s = slope_term(meas, *state.prev, params.slope_normalization, state.prev_slope, params.thresholds);
  StepOutcome out;
  out.new_state = state;
  out.slope_term = s;
  out.new_state.prev = meas;
  out.new_state.prev_slope = s;

  if (std::abs(s) <= params.epsilon) {
    out.new_state.delta_d = params.delta_d_nominal;
    out.new_state.delta_d_max = params.delta_d_max_0;
    out.new_state.prev_slope_sign = 0;
    out.new_state.at_mpp = true;
    out.action = Action::HeldAtMpp;
    return out;
  }

  const int direction = sign_of(s);
  const bool has_history = state.prev_slope_sign && *state.prev_slope_sign != 0;
  const bool flipped = has_history && *state.prev_slope_sign != direction;
  const double factor = !has_history ? 1.0 : (flipped ? params.deacc : params.acc);

  double bound = state.delta_d_max;
  if (params.adaptive_upper_bound && flipped) bound = std::max(params.delta_d_max_floor, bound * params.deacc);

  const double step = std::clamp(state.delta_d * factor * std::abs(s), params.delta_d_floor, bound);
  out.new_state.delta_d = std::clamp(state.delta_d * factor, params.delta_d_floor, bound);
  out.new_state.delta_d_max = bound;
  out.new_state.prev_slope_sign = direction;
  out.new_state.at_mpp = false;
  out.new_state.d = apply_move(params, state.d, direction, step);
  out.duty_step = out.new_state.d - state.d;
  out.action = action_for(direction);
  return out;
}

Controller::Controller(ControllerKind kind, ControllerParams params, double initial_duty)
    : kind_(kind), params_(params) {
  if (kind_ == ControllerKind::RevisedFixedBound) params_.adaptive_upper_bound = false;
  if (kind_ == ControllerKind::RevisedAdaptiveBound) params_.adaptive_upper_bound = true;
  params_.validate();
  state_ = initial_state(params_, initial_duty);
}

StepOutcome Controller::step(const Measurement& meas) {
  StepOutcome out = kind_ == ControllerKind::Conventional ? conventional_step(state_, meas, params_)
                                                          : revised_step(state_, meas, params_);
  state_ = out.new_state;
  return out;
}

}  // namespace mppt
