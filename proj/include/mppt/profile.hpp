#pragma once

#include <cstddef>
#include <filesystem>
#include <istream>
#include <string_view>
#include <vector>

#include "mppt/pv_model.hpp"

namespace mppt {

struct ProfileSegment {
  double t_start = 0.0;  // s
  EnvCondition env;
};

/// Piecewise-constant environment over [0, duration).
class EnvProfile {
 public:
  EnvProfile(std::vector<ProfileSegment> segments, double duration);

  const std::vector<ProfileSegment>& segments() const { return segments_; }
  double duration() const { return duration_; }

  std::size_t segment_index(double t) const;
  const EnvCondition& at(double t) const { return segments_[segment_index(t)].env; }

 private:
  std::vector<ProfileSegment> segments_;
  double duration_;
};

/// Cloud transient over 5 s, 16 steps of irradiance at 298 K.
EnvProfile builtin_table1_profile();

/// CSV with header `time_s,irradiance_w_m2,temperature_c`. Blank lines and `#` comments are skipped.
EnvProfile parse_profile_csv(std::istream& in, double duration, std::string_view source_name = "<profile>");
EnvProfile load_profile_csv(const std::filesystem::path& path, double duration);

}  // namespace mppt
