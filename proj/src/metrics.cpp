#include "mppt/metrics.hpp"

#include <algorithm>
#include <cmath>

namespace mppt {

std::string_view to_string(SettleStatus status) {
  switch (status) {
    case SettleStatus::Settled: return "settled";
    case SettleStatus::NotSettled: return "not_settled";
    case SettleStatus::NotAssessable: return "not_assessable";
  }
  return "unknown";
}

double TrackingMetrics::max_voltage_overshoot() const {
  double worst = 0.0;
  for (const auto& seg : segments) worst = std::max(worst, seg.max_voltage_overshoot);
  return worst;
}

double relative_deviation(const SimRecord& rec) {
  if (rec.p_mpp > 0.0) return rec.p_deviation / rec.p_mpp;
  return 0.0;
}

TrackingMetrics compute_metrics(std::span<const SimRecord> trace, const MetricsSettings& settings) {
  if (trace.empty()) throw InvalidArgument("compute_metrics: empty trace");
  if (!(settings.control_interval > 0.0)) throw InvalidArgument("compute_metrics: control_interval must be > 0");

  const double dt = settings.control_interval;
  const auto hold_steps = static_cast<std::size_t>(std::llround(settings.settle_hold / dt));

  TrackingMetrics metrics;
  double rel_sum = 0.0;
  std::size_t rel_count = 0;
  for (const auto& rec : trace) {
    metrics.energy_deficit += rec.p_deviation * dt;
    if (rec.p_mpp > 0.0) {
      rel_sum += relative_deviation(rec);
      ++rel_count;
    }
  }
  metrics.mean_relative_deviation = rel_count > 0 ? rel_sum / static_cast<double>(rel_count) : 0.0;

  std::size_t moved_after_settle = 0;
  std::size_t begin = 0;
  while (begin < trace.size()) {
    std::size_t end = begin + 1;
    while (end < trace.size() && trace[end].g == trace[begin].g && trace[end].temp == trace[begin].temp) ++end;

    SegmentMetrics seg;
    seg.first_index = begin;
    seg.count = end - begin;
    seg.t_start = trace[begin].t;
    seg.duration = static_cast<double>(seg.count) * dt;
    seg.env = EnvCondition{trace[begin].g, trace[begin].temp};
    seg.end_relative_deviation = relative_deviation(trace[end - 1]);

    const double v_target = trace[begin].v_mpp;
    const double v_start = trace[begin].v;
    for (std::size_t j = begin; j < end; ++j) {
      const double err = trace[j].v - v_target;
      seg.max_abs_voltage_error = std::max(seg.max_abs_voltage_error, std::abs(err));
      double excursion = std::abs(err);
      if (v_start < v_target) excursion = err;
      else if (v_start > v_target) excursion = -err;
      seg.max_voltage_overshoot = std::max(seg.max_voltage_overshoot, excursion);
      if (!seg.first_hold_time && trace[j].action == Action::HeldAtMpp) {
        seg.first_hold_time = static_cast<double>(j - begin) * dt;
      }
    }

    if (seg.count < hold_steps || hold_steps == 0) {
      seg.status = hold_steps == 0 ? SettleStatus::Settled : SettleStatus::NotAssessable;
    } else {
      // First index from which the next hold_steps records all stay within tolerance.
      std::size_t run = 0;
      std::optional<std::size_t> settled_at;
      for (std::size_t j = begin; j < end; ++j) {
        run = std::abs(relative_deviation(trace[j])) < settings.settle_tolerance ? run + 1 : 0;
        if (run == hold_steps) {
          settled_at = j + 1 - hold_steps;
          break;
        }
      }
      if (settled_at) {
        seg.status = SettleStatus::Settled;
        seg.settling_time = static_cast<double>(*settled_at - begin) * dt;
        for (std::size_t j = *settled_at; j < end; ++j) {
          ++metrics.post_settle_steps;
          if (trace[j].action != Action::HeldAtMpp) ++moved_after_settle;
        }
      } else {
        seg.status = SettleStatus::NotSettled;
      }
    }
    metrics.segments.push_back(seg);
    begin = end;
  }
  metrics.oscillation_fraction = metrics.post_settle_steps > 0
                                     ? static_cast<double>(moved_after_settle) / static_cast<double>(metrics.post_settle_steps)
                                     : 0.0;
  return metrics;
}

}  // namespace mppt
