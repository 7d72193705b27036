#include "mppt/trace_io.hpp"

#include <cmath>
#include <fstream>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "mppt/error.hpp"

namespace mppt {

namespace {

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(fmt::format("cannot write '{}'", path.string()));
  return out;
}

void finish(std::ofstream& out, const std::filesystem::path& path) {
  out.flush();
  if (!out) throw Error(fmt::format("write to '{}' failed", path.string()));
}

std::string num(double x) {
  if (std::isnan(x)) return "nan";
  return fmt::format("{:.12g}", x);
}

}  // namespace

void write_trace_csv(std::ostream& out, std::span<const SimRecord> trace) {
  out << kTraceHeader << '\n';
  for (const auto& r : trace) {
    out << num(r.t) << ',' << num(r.g) << ',' << num(r.temp) << ',' << num(r.v) << ',' << num(r.i) << ','
        << num(r.p) << ',' << num(r.d) << ',' << num(r.delta_d) << ',' << num(r.delta_d_max) << ','
        << num(r.p_mpp) << ',' << num(r.v_mpp) << ',' << num(r.p_deviation) << ',' << to_string(r.action) << ','
        << num(r.slope_term) << '\n';
  }
}

void write_trace_csv(const std::filesystem::path& path, std::span<const SimRecord> trace) {
  auto out = open_output(path);
  write_trace_csv(out, trace);
  finish(out, path);
}

void write_metrics_report(std::ostream& out, const TrackingMetrics& m) {
  out << "energy_deficit_j = " << num(m.energy_deficit) << '\n';
  out << "mean_relative_deviation = " << num(m.mean_relative_deviation) << '\n';
  out << "oscillation_fraction = " << num(m.oscillation_fraction) << '\n';
  out << "post_settle_steps = " << m.post_settle_steps << '\n';
  out << "max_voltage_overshoot_v = " << num(m.max_voltage_overshoot()) << '\n';
  out << "segments = " << m.segments.size() << '\n';
  for (std::size_t k = 0; k < m.segments.size(); ++k) {
    const auto& s = m.segments[k];
    const std::string p = fmt::format("segment_{}_", k);
    out << p << "t_start_s = " << num(s.t_start) << '\n';
    out << p << "duration_s = " << num(s.duration) << '\n';
    out << p << "irradiance_w_m2 = " << num(s.env.g) << '\n';
    out << p << "temperature_k = " << num(s.env.t) << '\n';
    out << p << "status = " << to_string(s.status) << '\n';
    if (s.status == SettleStatus::Settled) out << p << "settling_time_s = " << num(s.settling_time) << '\n';
    out << p << "max_voltage_overshoot_v = " << num(s.max_voltage_overshoot) << '\n';
    out << p << "max_abs_voltage_error_v = " << num(s.max_abs_voltage_error) << '\n';
    if (s.first_hold_time) out << p << "first_hold_time_s = " << num(*s.first_hold_time) << '\n';
    out << p << "end_relative_deviation = " << num(s.end_relative_deviation) << '\n';
  }
}

void write_metrics_report(const std::filesystem::path& path, const TrackingMetrics& metrics) {
  auto out = open_output(path);
  write_metrics_report(out, metrics);
  finish(out, path);
}

void write_curve_csv(const std::filesystem::path& path, std::span<const IVPoint> curve) {
  auto out = open_output(path);
  out << kCurveHeader << '\n';
  for (const auto& pt : curve) out << num(pt.v) << ',' << num(pt.i) << ',' << num(pt.p()) << '\n';
  finish(out, path);
}

}  // namespace mppt
