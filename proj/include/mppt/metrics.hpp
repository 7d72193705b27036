#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "mppt/simulation.hpp"

namespace mppt {

struct MetricsSettings {
  double settle_tolerance = 0.01;  // relative power deviation
  double settle_hold = 0.1;        // s
  double control_interval = 0.010; // s, spacing of the trace records
};

enum class SettleStatus { Settled, NotSettled, NotAssessable };

std::string_view to_string(SettleStatus status);

/// A maximal run of records with the same environment.
struct SegmentMetrics {
  std::size_t first_index = 0;
  std::size_t count = 0;
  double t_start = 0.0;
  double duration = 0.0;
  EnvCondition env;
  SettleStatus status = SettleStatus::NotSettled;
  double settling_time = 0.0;          // meaningful when status == Settled
  double max_voltage_overshoot = 0.0;  // excursion past v_mpp, opposite side from the segment start
  double max_abs_voltage_error = 0.0;  // max |v - v_mpp|
  std::optional<double> first_hold_time;  // since segment start
  double end_relative_deviation = 0.0;
};

struct TrackingMetrics {
  std::vector<SegmentMetrics> segments;
  double oscillation_fraction = 0.0;  // share of post-settle steps that moved the duty
  std::size_t post_settle_steps = 0;
  double energy_deficit = 0.0;        // J
  double mean_relative_deviation = 0.0;

  double max_voltage_overshoot() const;
};

double relative_deviation(const SimRecord& rec);

TrackingMetrics compute_metrics(std::span<const SimRecord> trace, const MetricsSettings& settings = {});

}  // namespace mppt
