#include "mppt/profile.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <string>

#include <fmt/core.h>

#include "mppt/error.hpp"

namespace mppt {

namespace {

// Sample instants are k * dt in floating point; allow them to sit a hair before a boundary.
constexpr double kBoundarySlack = 1e-9;

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

double parse_number(std::string_view field, std::string_view source, int line) {
  field = trim(field);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc{} || ptr != field.data() + field.size()) {
    throw ConfigError(fmt::format("{}:{}: '{}' is not a number", source, line, field));
  }
  return value;
}

}  // namespace

EnvProfile::EnvProfile(std::vector<ProfileSegment> segments, double duration)
    : segments_(std::move(segments)), duration_(duration) {
  if (segments_.empty()) throw InvalidArgument("profile has no segments");
  if (segments_.front().t_start != 0.0) throw InvalidArgument("profile must start at t = 0");
  for (std::size_t k = 0; k < segments_.size(); ++k) {
    segments_[k].env.validate();
    if (k > 0 && !(segments_[k].t_start > segments_[k - 1].t_start)) {
      throw InvalidArgument(fmt::format("profile start times must be strictly increasing (segment {})", k));
    }
  }
  if (!(duration_ > segments_.back().t_start)) {
    throw InvalidArgument(fmt::format("profile duration {} must exceed the last start time {}", duration_,
                                      segments_.back().t_start));
  }
}

std::size_t EnvProfile::segment_index(double t) const {
  const auto it = std::upper_bound(segments_.begin(), segments_.end(), t + kBoundarySlack,
                                   [](double time, const ProfileSegment& seg) { return time < seg.t_start; });
  return it == segments_.begin() ? 0 : static_cast<std::size_t>(it - segments_.begin()) - 1;
}

EnvProfile builtin_table1_profile() {
  constexpr double t_cell = 298.0;
  const std::vector<std::pair<double, double>> table = {
      {0.0, 1000}, {0.2, 20},  {0.7, 200}, {0.9, 300}, {1.2, 400}, {1.5, 500}, {1.9, 650}, {2.5, 850},
      {3.0, 990},  {4.0, 150}, {4.2, 120}, {4.3, 20},  {4.4, 210}, {4.5, 330}, {4.8, 340}, {4.9, 350}};
  std::vector<ProfileSegment> segments;
  segments.reserve(table.size());
  for (const auto& [t, g] : table) segments.push_back({t, EnvCondition{g, t_cell}});
  return EnvProfile(std::move(segments), 5.0);
}

EnvProfile parse_profile_csv(std::istream& in, double duration, std::string_view source_name) {
  std::string raw;
  int line = 0;
  bool header_seen = false;
  std::vector<ProfileSegment> segments;
  while (std::getline(in, raw)) {
    ++line;
    const auto text = trim(raw);
    if (text.empty() || text.front() == '#') continue;
    if (!header_seen) {
      if (text != "time_s,irradiance_w_m2,temperature_c") {
        throw ConfigError(fmt::format("{}:{}: expected header 'time_s,irradiance_w_m2,temperature_c', got '{}'",
                                      source_name, line, text));
      }
      header_seen = true;
      continue;
    }
    std::vector<std::string_view> fields;
    std::size_t pos = 0;
    while (true) {
      const auto comma = text.find(',', pos);
      fields.push_back(text.substr(pos, comma == std::string_view::npos ? std::string_view::npos : comma - pos));
      if (comma == std::string_view::npos) break;
      pos = comma + 1;
    }
    if (fields.size() != 3) {
      throw ConfigError(fmt::format("{}:{}: expected 3 fields, got {}", source_name, line, fields.size()));
    }
    ProfileSegment seg;
    seg.t_start = parse_number(fields[0], source_name, line);
    seg.env.g = parse_number(fields[1], source_name, line);
    seg.env.t = celsius_to_kelvin(parse_number(fields[2], source_name, line));
    try {
      seg.env.validate();
    } catch (const InvalidArgument& e) {
      throw ConfigError(fmt::format("{}:{}: {}", source_name, line, e.what()));
    }
    if (!segments.empty() && !(seg.t_start > segments.back().t_start)) {
      throw ConfigError(fmt::format("{}:{}: time_s must be strictly increasing", source_name, line));
    }
    if (segments.empty() && seg.t_start != 0.0) {
      throw ConfigError(fmt::format("{}:{}: first time_s must be 0", source_name, line));
    }
    segments.push_back(seg);
  }
  if (!header_seen) throw ConfigError(fmt::format("{}: empty profile", source_name));
  if (segments.empty()) throw ConfigError(fmt::format("{}: profile has no rows", source_name));
  try {
    return EnvProfile(std::move(segments), duration);
  } catch (const InvalidArgument& e) {
    throw ConfigError(fmt::format("{}: {}", source_name, e.what()));
  }
}

EnvProfile load_profile_csv(const std::filesystem::path& path, double duration) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("cannot open profile CSV '{}'", path.string()));
  return parse_profile_csv(in, duration, path.string());
}

}  // namespace mppt
