#pragma once

#include <filesystem>
#include <ostream>
#include <span>
#include <string_view>
#include <vector>

#include "mppt/metrics.hpp"
#include "mppt/simulation.hpp"

namespace mppt {

/// Header row of trace.csv. Columns follow SimRecord field order; temperature is in kelvin.
inline constexpr std::string_view kTraceHeader =
    "t_s,irradiance_w_m2,temperature_k,v_v,i_a,p_w,duty,delta_d,delta_d_max,p_mpp_w,v_mpp_v,p_deviation_w,action,"
    "slope_term";

inline constexpr std::string_view kCurveHeader = "v_v,i_a,p_w";

void write_trace_csv(std::ostream& out, std::span<const SimRecord> trace);
void write_trace_csv(const std::filesystem::path& path, std::span<const SimRecord> trace);

/// Flat `key = value` lines, one block of segment_<k>_* keys per segment.
void write_metrics_report(std::ostream& out, const TrackingMetrics& metrics);
void write_metrics_report(const std::filesystem::path& path, const TrackingMetrics& metrics);

void write_curve_csv(const std::filesystem::path& path, std::span<const IVPoint> curve);

}  // namespace mppt
