#include "mppt/converter.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/core.h>

#include "mppt/error.hpp"

namespace mppt {

void BuckBoostModel::validate() const {
  if (!(v_bus > 0.0) || !std::isfinite(v_bus)) throw InvalidArgument(fmt::format("converter.v_bus must be > 0, got {}", v_bus));
  if (!(d_min > 0.0 && d_min < d_max && d_max < 1.0)) {
    throw InvalidArgument(fmt::format("converter clamps must satisfy 0 < d_min < d_max < 1, got [{}, {}]", d_min, d_max));
  }
}

double clamp_duty(const BuckBoostModel& model, double d) { return std::clamp(d, model.d_min, model.d_max); }

VoltageCommand terminal_voltage(const BuckBoostModel& model, double d) {
  VoltageCommand out;
  out.duty = clamp_duty(model, d);
  out.clamped = out.duty != d;
  out.v = model.v_bus * (1.0 - out.duty) / out.duty;
  return out;
}

double duty_for_voltage(const BuckBoostModel& model, double v_target) {
  if (!(v_target > 0.0)) throw InvalidArgument(fmt::format("duty_for_voltage: target must be > 0, got {}", v_target));
  if (std::isinf(v_target)) return model.d_min;
  return clamp_duty(model, model.v_bus / (model.v_bus + v_target));
}

}  // namespace mppt
