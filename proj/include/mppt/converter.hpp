#pragma once

// Ideal buck-boost stage in continuous conduction feeding a stiff dc bus:
// V_pv = V_bus (1 - d) / d.

namespace mppt {

struct BuckBoostModel {
  double v_bus = 0.0;
  double d_min = 0.05;
  double d_max = 0.95;

  /// Raising d lowers the panel voltage.
  static constexpr int dv_dd_sign = -1;

  void validate() const;
};

struct VoltageCommand {
  double v = 0.0;
  double duty = 0.0;     // duty actually applied after clamping
  bool clamped = false;
};

double clamp_duty(const BuckBoostModel& model, double d);

VoltageCommand terminal_voltage(const BuckBoostModel& model, double d);

double duty_for_voltage(const BuckBoostModel& model, double v_target);

}  // namespace mppt
